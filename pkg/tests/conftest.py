import pytest

from cesched import data
from cesched import machine as machines

UNIT_LOOP = """double a[100];

void main(void) {
    int i;
    #pragma omp parallel
    {
        #pragma omp for
        for (i = 0; i < 100; i++) {
            a[i] = 1.0;
        }
    }
}
"""


def loop_program(n_itrs: int, body: str, schedule: str = "") -> str:
    clause = f" schedule({schedule})" if schedule else ""
    return f"""double a[{max(n_itrs, 1)}];
double b[{max(n_itrs, 1)}];

void main(void) {{
    int i;
    int j;
    #pragma omp parallel
    {{
        #pragma omp for{clause}
        for (i = 0; i < {n_itrs}; i++) {{
            {body}
        }}
    }}
}}
"""


@pytest.fixture(scope="session")
def machine():
    return machines.default_machine()


@pytest.fixture(scope="session")
def toy_machine():
    return machines.toy_machine()


@pytest.fixture(scope="session")
def corpus():
    return data.corpus()

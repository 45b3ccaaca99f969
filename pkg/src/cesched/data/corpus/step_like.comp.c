/* A work-shared loop inside a time-step loop, so the region is re-entered. */
double a[1000];
double b[1000];
int N = 1000;

void S(int i) {
    int j;
    for (j = 0; j < 2000; j++) {
        a[i] = a[i] * 0.5 + sin(b[i] + j);
    }
}

void main(void) {
    int step;
    int i;
    for (step = 0; step < 4; step++) {
        #pragma omp parallel
        {
            #pragma omp for
            for (i = 0; i < N; i++) {
                S(i);
            }
        }
    }
}

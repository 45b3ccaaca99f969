/* Conjugate-gradient style sweeps: cheap vector loops inside an outer iteration. */
double p[8192];
double q[8192];
double r[8192];
double z[8192];
int N = 8192;

void main(void) {
    int it;
    int i;
    double alpha = 0.25;
    for (it = 0; it < 3; it++) {
        #pragma omp parallel
        {
            #pragma omp for
            for (i = 0; i < N; i++) {
                q[i] = p[i] * 0.5;
            }
            #pragma omp for
            for (i = 0; i < N; i++) {
                r[i] = r[i] - alpha * q[i];
            }
            #pragma omp for
            for (i = 0; i < N; i++) {
                z[i] = r[i] + z[i];
            }
        }
    }
}

/* Embarrassingly parallel kernel: one large loop with a heavy, uniform body. */
double xs[4096];
double sums[16];

void main(void) {
    int i;
    for (i = 0; i < 4096; i++) {
        xs[i] = i * 0.5;
    }
    #pragma omp parallel
    {
        int j;
        double x;
        double y;
        #pragma omp for
        for (i = 0; i < 16384; i++) {
            x = xs[i % 4096] * 1.0001;
            y = sqrt(x * x + 1.0) + log(x + 2.0);
            for (j = 0; j < 400 + i % 7 * 40; j++) {
                y = y * 0.999 + sin(y) * 0.001;
            }
            sums[omp_get_thread_num()] += y;
        }
    }
}

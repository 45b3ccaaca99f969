/* A barrier-free block: uniform compute steps around a branch on the thread id. */
double res[16];

void main(void) {
    #pragma omp parallel
    {
        int tid = omp_get_thread_num();
        double acc = 0.0;
        int k;
        for (k = 0; k < 20000; k++) {
            acc = acc * 0.5 + sqrt(acc + k);
        }
        for (k = 0; k < 20000; k++) {
            acc = acc * 0.5 + sqrt(acc + k);
        }
        for (k = 0; k < 20000; k++) {
            acc = acc * 0.5 + sqrt(acc + k);
        }
        if (tid % 2 == 0) {
            for (k = 0; k < 16000; k++) {
                acc = acc + sin(acc) * 0.25;
            }
        } else {
            for (k = 0; k < 4000; k++) {
                acc = acc + sin(acc) * 0.25;
            }
        }
        for (k = 0; k < 20000; k++) {
            acc = acc * 0.5 + sqrt(acc + k);
        }
        for (k = 0; k < 20000; k++) {
            acc = acc * 0.5 + sqrt(acc + k);
        }
        for (k = 0; k < 20000; k++) {
            acc = acc * 0.5 + sqrt(acc + k);
        }
        for (k = 0; k < 20000; k++) {
            acc = acc * 0.5 + sqrt(acc + k);
        }
        for (k = 0; k < 20000; k++) {
            acc = acc * 0.5 + sqrt(acc + k);
        }
        for (k = 0; k < 20000; k++) {
            acc = acc * 0.5 + sqrt(acc + k);
        }
        res[tid] = acc;
    }
}

double res[16];
int N_THREADS = 8;
int mg[8];

void main(void) {
    #pragma omp parallel
    {
        int ces_tid = omp_get_thread_num();
        mg[ces_tid] = 0;
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
        if (inLITTLE(ces_tid)) {
            int ces_i = 0;
            while (ces_i < N_THREADS) {
                if (mg[ces_i] >= 1 && inbig(ces_i)) {
                    migrate(ces_tid, ces_i, 3);
                    break;
                }
                ces_i++;
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
        if (inbig(ces_tid)) {
            #pragma omp atomic write
            mg[ces_tid] = 1;
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

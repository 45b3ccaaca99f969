/* Four ALU-bound (prime-like) and four memory-bound (sine-table-like) sections. */
int found[8];
double tab[512];
double out[4096];

void main(void) {
    int s;
    for (s = 0; s < 512; s++) {
        tab[s] = s * 0.01;
    }
    #pragma omp parallel
    {
        int k;
        int c;
        double v;
        #pragma omp sections
        {
            #pragma omp section
            {
                c = 0;
                for (k = 3; k < 2000000; k += 2) {
                    c = c + (k * k % 7 == 1) + (k % 3 == 2) * 2 + (k % 5) / 3;
                }
                found[0] = c;
            }
            #pragma omp section
            {
                c = 0;
                for (k = 5; k < 2000002; k += 2) {
                    c = c + (k * k % 11 == 1) + (k % 3 == 1) * 2 + (k % 7) / 3;
                }
                found[1] = c;
            }
            #pragma omp section
            {
                c = 0;
                for (k = 7; k < 2000004; k += 2) {
                    c = c + (k * k % 13 == 1) + (k % 3 == 0) * 2 + (k % 11) / 3;
                }
                found[2] = c;
            }
            #pragma omp section
            {
                c = 0;
                for (k = 9; k < 2000006; k += 2) {
                    c = c + (k * k % 17 == 1) + (k % 5 == 0) * 2 + (k % 13) / 3;
                }
                found[3] = c;
            }
            #pragma omp section
            {
                for (k = 0; k < 400000; k++) {
                    v = tab[k % 512] * out[k % 4096] + tab[(k + 1) % 512];
                    out[k % 4096] = v;
                }
            }
            #pragma omp section
            {
                for (k = 0; k < 400000; k++) {
                    v = tab[(k + 7) % 512] * out[k % 4096] + tab[(k + 3) % 512];
                    out[k % 4096] = v;
                }
            }
            #pragma omp section
            {
                for (k = 0; k < 400000; k++) {
                    v = tab[(k + 11) % 512] * out[k % 4096] + tab[(k + 5) % 512];
                    out[k % 4096] = v;
                }
            }
            #pragma omp section
            {
                for (k = 0; k < 400000; k++) {
                    v = tab[(k + 13) % 512] * out[k % 4096] + tab[(k + 9) % 512];
                    out[k % 4096] = v;
                }
            }
        }
    }
}

/* Integer-sort style counting: a loop whose body is a single increment. */
int keys[32768];

void main(void) {
    int i;
    #pragma omp parallel
    {
        #pragma omp for
        for (i = 0; i < 32768; i++) {
            keys[i] += 1;
        }
    }
}

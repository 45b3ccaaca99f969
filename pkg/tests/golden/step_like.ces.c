double a[1000];
double b[1000];
int N = 1000;
int N_THREADS = 8;
int INITIAL_PRIVATE = 0;
int SHARED = 1;
int PRIVATE = 2;
int chunk = 1;
int itr[8];
int end[8];
int status[8];
double scaledend_1[8] = {0.167, 0.334, 0.501, 0.668, 0.751, 0.834, 0.917, 1.0};
int lock[8];

int getthread(void) {
    int best = 0;
    int k;
    for (k = 1; k < N_THREADS; k++) {
        if (end[k] - itr[k] > end[best] - itr[best]) {
            best = k;
        }
    }
    if (end[best] - itr[best] > chunk) {
        #pragma omp atomic write
        status[best] = SHARED;
        return best;
    }
    return N_THREADS;
}

int doitr(int t) {
    int v;
    if (itr[t] < end[t]) {
        if (status[t] != SHARED) {
            v = itr[t];
            itr[t] = v + 1;
            return v;
        }
        lock_acquire(t);
        v = itr[t];
        if (v < end[t]) {
            itr[t] = v + 1;
            lock_release(t);
            return v;
        }
        lock_release(t);
    }
    #pragma omp atomic write
    status[t] = PRIVATE;
    while (1) {
        int victim = getthread();
        if (victim == N_THREADS) {
            return -1;
        }
        int e = end[victim];
        int newend = e - chunk;
        lock_acquire(victim);
        if (end[victim] == e && newend > itr[victim]) {
            end[victim] = newend;
            lock_release(victim);
            lock_acquire(t);
            itr[t] = newend + 1;
            end[t] = e;
            lock_release(t);
            return newend;
        }
        lock_release(victim);
    }
    return -1;
}

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
            int ces_tid = omp_get_thread_num();
            initialize(scaledend_1, N, 1);
            #pragma omp barrier
            while ((i = doitr(ces_tid)) != -1) {
                S(i);
            }
            #pragma omp barrier
            update_scaledend(scaledend_1, N);
        }
    }
}

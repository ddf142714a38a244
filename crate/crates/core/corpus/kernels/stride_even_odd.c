// even cells are written, odd cells are read
param n = 100;
int i;
double a[2 * n + 2];
#pragma omp parallel for
for (i = 0; i < 2 * n; i += 2)
  a[i] = a[i + 1];

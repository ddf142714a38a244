param n = 100;
int i;
int idx[n];
double x[2 * n];
#pragma omp parallel for
for (i = 0; i < n; i++)
  x[idx[i]] = x[idx[i]] + 1.0;

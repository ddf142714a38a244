param n = 64;
int i, j;
double x[n], L[n][n];
for (i = 1; i < n; i++)
#pragma omp parallel for
  for (j = 0; j < i; j++)
    x[i] = x[i] - L[i][j] * x[j];

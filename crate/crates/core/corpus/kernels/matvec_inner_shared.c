param n = 100;
int i, j;
double A[n][n], x[n], y[n];
for (i = 0; i < n; i++)
#pragma omp parallel for
  for (j = 0; j < n; j++)
    y[i] += A[i][j] * x[j];

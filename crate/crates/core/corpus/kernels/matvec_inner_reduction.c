param n = 100;
int i, j;
double sum;
double A[n][n], x[n], y[n];
for (i = 0; i < n; i++) {
  sum = 0.0;
#pragma omp parallel for reduction(+:sum)
  for (j = 0; j < n; j++)
    sum += A[i][j] * x[j];
  y[i] = sum;
}

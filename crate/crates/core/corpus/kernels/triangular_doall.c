param n = 64;
int i, j;
double a[n][n], b[n][n];
#pragma omp parallel for private(j)
for (i = 0; i < n; i++)
  for (j = 0; j < min(i + 1, n); j++)
    a[i][j] = a[i][j] + b[j][i];

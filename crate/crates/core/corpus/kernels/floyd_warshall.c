// benign at run time for non-negative weights, still a race
param n = 64;
int i, j, k;
double A[n + 1][n + 1];
for (k = 1; k <= n; k++)
#pragma omp parallel for private(j)
  for (i = 1; i <= n; i++)
    for (j = 1; j <= n; j++)
      A[i][j] = min(A[i][k] + A[k][j], A[i][j]);

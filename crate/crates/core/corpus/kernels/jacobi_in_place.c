param n = 64;
int i, j;
double u[n][n];
#pragma omp parallel for private(j)
for (i = 1; i < n - 1; i++)
  for (j = 1; j < n - 1; j++)
    u[i][j] = (u[i - 1][j] + u[i + 1][j] + u[i][j - 1] + u[i][j + 1]) / 4.0;

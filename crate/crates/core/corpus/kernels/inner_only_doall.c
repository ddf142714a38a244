param n = 20, m = 20;
int i, j;
double a[n][m];
for (i = 0; i < n; i++)
#pragma omp parallel for
  for (j = 0; j < m; j++)
    a[i][j] = a[i][j] + 1.0;

param n = 100, m = 100;
int i;
double a[n][m];
#pragma omp parallel for
for (i = 0; i < n; i++)
  for (int j = 0; j < m; j++)
    a[i][j] = a[i][j] + 1.0;

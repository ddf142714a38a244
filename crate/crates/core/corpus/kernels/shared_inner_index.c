// j is declared outside the construct and not privatized
param n = 100, m = 100;
int i, j;
double a[n][m];
#pragma omp parallel for
for (i = 0; i < n; i++)
  for (j = 0; j < m; j++)
    a[i][j] = a[i][j] + 1.0;

param n = 100, m = 100;
int i, j;
double b[n][m];
for (i = 1; i < n; i++) {
#pragma omp parallel for
  for (j = 0; j < m; j++)
    b[i][j] = b[i - 1][j];
}

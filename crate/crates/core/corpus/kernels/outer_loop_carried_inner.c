param n = 100, m = 100;
int i, j;
double b[n][m];
#pragma omp parallel for private(j)
for (i = 0; i < n; i++) {
  for (j = 1; j < m; j++) {
    b[i][j] = b[i][j-1];
  }
}

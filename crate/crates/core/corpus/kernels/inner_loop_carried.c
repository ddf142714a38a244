// only the inner loop carries the dependence, and it is the one marked
param n = 100, m = 100;
int i, j;
double b[n][m];
for (i = 0; i < n; i++) {
#pragma omp parallel for
  for (j = 1; j < m; j++) {
    b[i][j] = b[i][j-1];
  }
}

param n = 50;
int i, j;
double a[n][n];
#pragma omp parallel for collapse(2)
for (i = 0; i < n; i++)
  for (j = 1; j < n; j++)
    a[i][j] = a[i][j - 1] + 1.0;

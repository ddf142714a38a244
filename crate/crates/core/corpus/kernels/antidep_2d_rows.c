param len = 20;
int i, j;
double a[len][len];
#pragma omp parallel for private(j)
for (i = 0; i < len - 1; i++)
  for (j = 0; j < len; j++)
    a[i][j] = a[i][j] + a[i + 1][j];

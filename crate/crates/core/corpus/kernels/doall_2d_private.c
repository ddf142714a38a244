param len = 100;
int i, j;
int a[len][len];
#pragma omp parallel for private(j)
for (i = 0; i < len; i++)
  for (j = 0; j < len; j++)
    a[i][j] = a[i][j] + 1;

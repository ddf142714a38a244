param len = 100;
int i;
int a[len];
#pragma omp parallel for
for (i = 0; i < len - 1; i++)
  a[i + 1] = a[i] + 1;

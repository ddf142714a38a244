param len = 100;
int i;
int a[len];
#pragma omp parallel for
for (i = 0; i < len; i++)
  a[i] = a[i] + 1;

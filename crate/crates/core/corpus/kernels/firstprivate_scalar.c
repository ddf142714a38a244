param len = 100;
int i, g;
int a[len];
#pragma omp parallel for firstprivate(g)
for (i = 0; i < len; i++)
  a[i] = a[i] + g;

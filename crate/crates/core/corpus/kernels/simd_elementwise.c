param len = 100;
int i;
double a[len], b[len], c[len];
#pragma omp simd
for (i = 0; i < len; i++)
  a[i] = b[i] + c[i];

param n = 100;
int i;
double a[n];
#pragma omp parallel for
for (i = n - 1; i >= 1; i--)
  a[i] = a[i - 1];

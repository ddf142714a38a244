param n = 100;
int i;
double x;
double a[n];
#pragma omp parallel for lastprivate(x)
for (i = 0; i < n; i++)
  x = a[i];

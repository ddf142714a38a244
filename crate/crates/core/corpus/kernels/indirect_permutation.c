// idx holds a permutation, so writes never collide
param n = 100;
int i;
int idx[n];
double a[n], b[n];
#pragma omp parallel for
for (i = 0; i < n; i++)
  a[idx[i]] = b[i] + 1.0;

param n = 100;
int i;
int idx[n];
double s;
double a[n], b[n];
#pragma omp parallel for private(s)
for (i = 0; i < n; i++) {
  s = a[idx[i]];
  b[i] = s;
}

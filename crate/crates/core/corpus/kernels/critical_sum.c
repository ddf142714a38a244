param n = 100;
int i;
double s;
double a[n];
#pragma omp parallel for
for (i = 0; i < n; i++) {
#pragma omp critical
  s += a[i];
}

param n = 100;
int i;
double s;
double a[n];
#pragma omp parallel for ordered
for (i = 0; i < n; i++) {
#pragma omp ordered
  s = s + a[i];
}

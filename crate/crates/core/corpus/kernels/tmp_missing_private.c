param len = 100;
int i;
int tmp;
int a[len];
#pragma omp parallel for
for (i = 0; i < len; i++) {
  tmp = a[i] + i;
  a[i] = tmp;
}

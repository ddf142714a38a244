param len = 100;
int i, count;
int x[len];
#pragma omp parallel for
for (i = 0; i < len; i++) {
  x[i] = i;
  count -= 1;
}

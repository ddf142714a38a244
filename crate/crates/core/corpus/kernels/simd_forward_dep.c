param len = 100;
double a[len], b[len];
#pragma omp simd
for (int i = 0; i < len - 1; i++) {
  a[i+1] = a[i] + b[i];
}

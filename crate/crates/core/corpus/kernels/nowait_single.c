param len = 1000;
int i, b, error;
int a[len];
#pragma omp parallel shared(b, error)
{
#pragma omp for nowait
  for (i = 0; i < len; i++)
    a[i] = b + a[i] * 5;
#pragma omp single
  error = a[9] + 1;
}

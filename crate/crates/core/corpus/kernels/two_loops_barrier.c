param len = 100;
int i;
double a[len], b[len], c[len];
#pragma omp parallel
{
#pragma omp for
  for (i = 0; i < len; i++)
    a[i] = b[i];
#pragma omp for
  for (i = 0; i < len; i++)
    c[i] = a[len - 1 - i];
}

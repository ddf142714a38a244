int x;
#pragma omp parallel sections
{
#pragma omp section
  x = 1;
#pragma omp section
  x = 2;
}

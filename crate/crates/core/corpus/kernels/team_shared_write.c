int flag;
#pragma omp parallel
{
  flag = 1;
}

int counter;
#pragma omp threadprivate(counter)
#pragma omp parallel
{
  counter = counter + 1;
}

// shared accumulator updated by every iteration
param len = 100;
int i, j;
double temp, sum;
double u[len][len];
#pragma omp parallel for private(temp, i, j)
for (i = 0; i < len; i++)
  for (j = 0; j < len; j++) {
    temp = u[i][j];
    sum = sum + temp * temp;
  }

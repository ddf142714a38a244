param steps = 2000;
int i;
double x, pi;
#pragma omp parallel for private(x) reduction(+:pi)
for (i = 0; i < steps; i++) {
  x = (i + 0.5) / steps;
  pi += 4.0 / (1.0 + x * x);
}

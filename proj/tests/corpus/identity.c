void identity(int a, int *out) {
  *out = a;
}

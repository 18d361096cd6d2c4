/* Multiply-accumulate of 12-bit pairs, gated by the new-data flag `nd`. */
void mul_acc(int12_t a[32], int12_t b[32], uint1_t nd[32], int *q) {
  int sum = 0;
  for (int i = 0; i < 32; i++) {
    if (nd[i]) {
      sum = sum + a[i] * b[i];
    }
  }
  *q = sum;
}

/* Running sum; `sum` is carried from one iteration to the next. */
void accumulator(int16_t A[16], int *out) {
  int sum = 0;
  for (int i = 0; i < 16; i++) {
    sum = sum + A[i];
  }
  *out = sum;
}

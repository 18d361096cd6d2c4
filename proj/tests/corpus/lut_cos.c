/* Builtin cosine table: 10-bit phase in, signed 16-bit amplitude out. */
void lut_cos(uint10_t phase[32], int16_t out[32]) {
  for (int i = 0; i < 32; i++) {
    out[i] = lut("cos", phase[i]);
  }
}

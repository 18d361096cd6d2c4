/* 8-point integer DCT over eight blocks; both inner loops unroll fully. */
const int COEF[8][8] = {
  {45, 45, 45, 45, 45, 45, 45, 45},
  {63, 53, 36, 12, -12, -36, -53, -63},
  {59, 24, -24, -59, -59, -24, 24, 59},
  {53, -12, -63, -36, 36, 63, 12, -53},
  {45, -45, -45, 45, 45, -45, -45, 45},
  {36, -63, 12, 53, -53, -12, 63, -36},
  {24, -59, 59, -24, -24, 59, -59, 24},
  {12, -36, 53, -63, 63, -53, 36, -12}
};

void dct8(uint8_t x[64], int y[64]) {
  for (int b = 0; b < 8; b++) {
    for (int k = 0; k < 8; k++) {
      int s = 0;
      for (int n = 0; n < 8; n++) {
        s = s + COEF[k][n] * x[8 * b + n];
      }
      y[8 * b + k] = s;
    }
  }
}

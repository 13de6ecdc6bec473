"""The shipped toy prefix-free machine.

Each entry is ``(program, halting stage)``. The programs form a prefix-free
set; program ``"0"`` halts at stage 1, and everything else lives under
``"1"``. Programs not listed never halt. Summing ``2**-len(p)`` over the
programs halted by stage ``s`` gives an Omega-like left-c.e. stream whose
limit is a little above 0.675.

The table was drawn once from ``random.Random(20150201)`` and is frozen
here; halting stages are skewed towards early stages so short horizons
still see many increments.
"""

PROGRAM_TABLE: tuple[tuple[str, int], ...] = (
    ("0", 1),
    ("10000", 12),
    ("11000011111110101111", 16),
    ("11000010101011001100101101001110", 18),
    ("1101011011100", 20),
    ("11010101000100111001111001110111", 29),
    ("1101101101001100", 32),
    ("10110001", 33),
    ("1010100111100100001001001000", 41),
    ("1010001111000010100111001001", 45),
    ("10101110", 70),
    ("1010100001", 106),
    ("1110001011000001001100000110", 133),
    ("10101101", 138),
    ("100010000100", 140),
    ("111101001011111101010110", 167),
    ("1100011", 188),
    ("1000100100010011010010101111000001101101", 251),
    ("10111100110100", 254),
    ("110110110110100000101001", 265),
    ("10111011110000000100000100111110", 269),
    ("110100011", 271),
    ("1111010011", 345),
    ("1011110011011", 349),
    ("1101110", 368),
    ("111001011110", 379),
    ("1100101100101010", 391),
    ("1010100100000100001000110000111100110100", 407),
    ("10011", 479),
    ("11110011", 579),
    ("110010010", 621),
    ("10111100000001", 661),
    ("110011100100010110000100", 666),
    ("11011010101011", 777),
    ("11000000110011101110", 780),
    ("111110111101101010001011", 804),
    ("11101", 819),
    ("1111010010100", 873),
    ("11111101101110", 938),
    ("1001010111", 1034),
    ("1001000000011001001111011101", 1062),
    ("11001101000000111100", 1063),
    ("11100101001110000011000110101010", 1121),
    ("1111111000", 1148),
    ("10100001110001", 1217),
    ("10101010010110", 1220),
    ("1000110100111110", 1299),
    ("10010101001", 1319),
    ("11010001000", 1385),
    ("101100000", 1529),
    ("1001011110101111", 1629),
    ("100010110101011000000110", 1639),
    ("1000100101100", 1641),
    ("1111101001011010001011011010", 1645),
    ("10111101", 1679),
    ("1001001", 1718),
    ("110101011", 1719),
    ("1000110101", 1748),
    ("10100100", 1762),
    ("10010100", 1778),
    ("101101", 1820),
    ("1010100110010100110010110011", 1828),
    ("10100011010111110001", 1893),
    ("10100000100011", 1944),
)

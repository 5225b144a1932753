# Tests for hurwitz_approx

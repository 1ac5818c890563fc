"""Regenerate the bundled two-qubit dissociation-curve coefficient files.

The files describe an H2-style two-qubit model

    H(d) = g0 II + g1 ZI + g2 IZ + g3 ZZ + g4 XX + g5 YY

with coefficients drawn from a smooth analytic family shaped to mimic a
molecular dissociation curve (Morse-well ground energy, exchange terms
growing toward dissociation, single-qubit Z terms decaying).  They are
not tabulated electronic-structure integrals; they exist so bond-length
sweeps have a realistic-looking, smoothly varying target whose exact
ground energy is known in closed form.

The identity coefficient is chosen last so that the exact ground energy
equals the Morse target exactly; the script verifies this by dense
diagonalization before writing anything.

Run from the repository root:

    python3 scripts/make_hydrogen_tables.py
"""

import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from vqelab.hamiltonian import exact_ground_energy, pauli_sum, save_pauli_sum

LENGTHS = [0.40, 0.55, 0.70, 0.85, 1.00, 1.20, 1.40, 1.60, 1.80, 2.00]

# Morse well for the ground energy: minimum -1.1373 at d = 0.735,
# dissociation plateau -0.99
WELL_DEPTH = 0.1473
PLATEAU = -0.99
RE = 0.735
MORSE_A = 2.0


def coefficients(d: float) -> dict:
    x = np.exp(-MORSE_A * (d - RE))
    target = PLATEAU - WELL_DEPTH * (2.0 * x - x ** 2)
    g1 = 0.22 * np.exp(-1.5 * d)
    g3 = 0.01 + 0.09 * np.exp(-0.8 * d)
    g4 = 0.09 + 0.10 * (1.0 - np.exp(-1.1 * (d - 0.3)))
    # ground state lives in the {|01>, |10>} block with energy
    # g0 - g3 - 2 g4 as long as g1 < g3 + g4 (checked below), so the
    # identity shift pins the ground energy to the Morse target
    assert g1 < g3 + g4, f"block ordering broken at d={d}"
    g0 = target + g3 + 2.0 * g4
    return {"II": g0, "ZI": g1, "IZ": g1, "ZZ": g3, "XX": g4, "YY": g4,
            "target": target}


def main() -> None:
    out_dir = os.path.join(os.path.dirname(__file__), "..", "src", "vqelab",
                           "data", "hydrogen")
    os.makedirs(out_dir, exist_ok=True)
    for d in LENGTHS:
        g = coefficients(d)
        ham = pauli_sum(2, [(g["II"], "II"), (g["ZI"], "ZI"),
                            (g["IZ"], "IZ"), (g["ZZ"], "ZZ"),
                            (g["XX"], "XX"), (g["YY"], "YY")])
        e0 = exact_ground_energy(ham)
        if abs(e0 - g["target"]) > 1e-12:
            raise AssertionError(
                f"d={d}: ground {e0} does not match target {g['target']}")
        path = os.path.join(out_dir, f"h2_{d:.2f}.txt")
        header = (f"H2-style two-qubit model, bond length {d:.2f}\n"
                  f"analytic family, regenerate with "
                  f"scripts/make_hydrogen_tables.py\n"
                  f"exact ground energy {e0!r}")
        save_pauli_sum(ham, path, header=header)
        print(f"{path}  E0={e0:+.6f}")


if __name__ == "__main__":
    main()

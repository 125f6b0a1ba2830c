"""Periodic-table data for the supported element scope.

The engine covers the organic subset plus the heteroatoms and counterions
that occur in polar mechanism datasets: B, C, N, O, F, Si, P, S, Cl, Se,
Br, Sn, I, and Li/Na/K/Mg.  Anything outside this table is rejected at
parse time with a clear error rather than handled with a guessed valence.
"""

from __future__ import annotations

# symbol -> atomic number
SYMBOL_TO_NUMBER = {
    "H": 1,
    "Li": 3,
    "B": 5,
    "C": 6,
    "N": 7,
    "O": 8,
    "F": 9,
    "Na": 11,
    "Mg": 12,
    "Si": 14,
    "P": 15,
    "S": 16,
    "Cl": 17,
    "K": 19,
    "Se": 34,
    "Br": 35,
    "Sn": 50,
    "I": 53,
}

NUMBER_TO_SYMBOL = {z: s for s, z in SYMBOL_TO_NUMBER.items()}

# Valence-shell electron count (group electrons), used for lone-pair
# bookkeeping: lone electrons = valence_e - charge - bonds.
VALENCE_ELECTRONS = {
    1: 1,   # H
    3: 1,   # Li
    5: 3,   # B
    6: 4,   # C
    7: 5,   # N
    8: 6,   # O
    9: 7,   # F
    11: 1,  # Na
    12: 2,  # Mg
    14: 4,  # Si
    15: 5,  # P
    16: 6,  # S
    17: 7,  # Cl
    19: 1,  # K
    34: 6,  # Se
    35: 7,  # Br
    50: 4,  # Sn
    53: 7,  # I
}

# Daylight-style default valences for implicit-hydrogen filling on bare
# (unbracketed) atoms.  Multi-valued entries pick the smallest default
# that covers the existing bond order sum.
DEFAULT_VALENCES = {
    5: (3,),         # B
    6: (4,),         # C
    7: (3, 5),       # N
    8: (2,),         # O
    9: (1,),         # F
    15: (3, 5),      # P
    16: (2, 4, 6),   # S
    17: (1,),        # Cl
    35: (1,),        # Br
    53: (1,),        # I
}

# Elements writable without brackets when in a default-valence state.
ORGANIC_SUBSET = {5, 6, 7, 8, 9, 15, 16, 17, 35, 53}

# Elements accepted in aromatic (lowercase) notation.
AROMATIC_ELEMENTS = {5, 6, 7, 8, 15, 16, 34}

GROUP_12_METALS = {3, 11, 12, 19}  # Li, Na, K, Mg: ionic, no lone-pair chemistry

# Period-2 elements obey the octet; heavier main-group atoms may expand
# up to 6 bonds (sulfonyl, phosphate, ...).
PERIOD_2 = {3, 5, 6, 7, 8, 9}

# Pauling electronegativities.
ELECTRONEGATIVITY = {
    1: 2.20,
    3: 0.98,
    5: 2.04,
    6: 2.55,
    7: 3.04,
    8: 3.44,
    9: 3.98,
    11: 0.93,
    12: 1.31,
    14: 1.90,
    15: 2.19,
    16: 2.58,
    17: 3.16,
    19: 0.82,
    34: 2.55,
    35: 2.96,
    50: 1.96,
    53: 2.66,
}


def max_bond_capacity(element: int) -> int:
    """Upper bound on total bond order (including attached hydrogens)."""
    if element == 1:
        return 1
    if element in GROUP_12_METALS:
        return 2 if element == 12 else 1
    if element in PERIOD_2:
        return 4
    return 6


def is_supported(element: int) -> bool:
    return element in VALENCE_ELECTRONS


def symbol(element: int) -> str:
    return NUMBER_TO_SYMBOL[element]

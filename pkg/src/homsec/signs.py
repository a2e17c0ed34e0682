"""Permutation signs and the table of sign conventions.

Every antisymmetric index block (tensor components, Grassmann monomials)
goes through :func:`sort_with_sign`.  The conventions that fix the
remaining signs of the package are listed in :data:`SIGN_LEDGER`; its
hash is written into every report so that a convention change shows up
in golden files.
"""
from __future__ import annotations

import hashlib
import json
from itertools import combinations
from typing import Iterable, Sequence

SIGN_LEDGER = {
    "components": "a_{i1..ik} = a(d_i1, .., d_ik); (1/k!) normalisation, so dx^0 ^ dx^1 has component +1 at (0,1)",
    "wedge": "shuffle sum per block; no sign between TM-form indices and E indices",
    "interior": "iota_v contracts the first TM-down slot",
    "de_rham": "(da)_{j0..jk} = sum_l (-1)^l d_{j_l} a_{j0..^j_l..jk}",
    "pairing": "<alpha|w> = sum over increasing multi-indices alpha_A w^A (equals (1/m!) alpha_A w^A over all A)",
    "connection": "nabla_i e_a = -omega^b_{ai} e_b; nabla_i u^a = d_i u^a - omega^a_{bi} u^b; nabla_i b_a = d_i b_a + omega^b_{ai} b_b",
    "torsion": "T^c_{ab} = -C^c_{ab} - rho^i_a omega^c_{bi} + rho^i_b omega^c_{ai}; [e_a,e_b]^nabla = -T(e_a,e_b)",
    "curvature": "R(d_i,d_j) e_a = R^c_{ija} e_c with R = [nabla_i, nabla_j]",
    "e_curvature": "ER[c] holds ER(e_a,e_b) e_c as a field with E-up d and E-down pair (a,b)",
    "e_differential": "rho(e_a) acts on TM-form parts by the Lie derivative along rho_a",
    "iota_rho_k": "(iota^k w)(e_1..e_k) = w(rho(e_k), .., rho(e_1), ..)",
    "homology": "d(e_1..e_m) = sum_{i<j} (-1)^(i+j+1) [e_i,e_j] e_1..^i..^j..e_m; d(f e_A) = f d(e_A) + sum_i (-1)^(i-1) (rho(e_{a_i}) f) e_{A minus a_i}; zero below degree 2",
    "iota_rho_section": "(iota_rho mu)(e_0..e_m) = sum_i (-1)^i iota_{rho(e_i)} mu(e_0..^e_i..e_m)",
    "grassmann": "q^A stored on increasing A; left derivative d/dq^a q^A = (-1)^(position of a) q^(A minus a)",
    "covariant_Q": "Q = rho^i_a q^a (d_i + omega^c_{bi} q^b d/dq^c) + (1/2) T^a_{bc} q^b q^c d/dq^a",
    "hmm_sign": "hat mu_k = (-1)^(n-k+1) mu_k",
    "sigma_sign": "mu_k = (-1)^(sum_{j=k+1}^{n-1} j) tmu_k; omega = (-1)^(n-1) tilde H",
    "so3_anchor": "rho^i_a = eps_{aij} x^j so that [e_a,e_b] = eps_{abc} e_c",
    "cotangent_algebroid": "E = T*M with e_a = dx^a, rho^i_a = pi^{ia}, C^k_{ab} = -d_k pi^{ab} + pi^{ai} pi^{bj} H_{jik}",
    "schouten": "[P,Q] = sum_i (dP/dtheta_i)_right d_i Q - (-1)^((p-1)(q-1)) (dQ/dtheta_i)_right d_i P; relations use -[.,.]",
    "twisted_poisson": "(1/2)(-[pi,pi]) = <(x)^3 pi, H> with <(x)^k pi, H>^{I} = pi^{i1 a1}..pi^{ik ak} H_{a1..ak}",
    "r_poisson": "-[pi,J] = -iota^{n+1} H, iota^{n+1} H = (-1)^(n+1) (-1)^(n(n+1)/2) <(x)^{n+1} pi, H>",
}


def ledger_hash() -> str:
    blob = json.dumps(SIGN_LEDGER, sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def sort_with_sign(idx: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sort ``idx`` and return (sign of the sorting permutation, sorted tuple).

    A repeated index gives sign 0.
    """
    items = list(idx)
    n = len(items)
    sign = 1
    # insertion sort counting transpositions; blocks are tiny
    for i in range(1, n):
        j = i
        while j > 0 and items[j - 1] > items[j]:
            items[j - 1], items[j] = items[j], items[j - 1]
            sign = -sign
            j -= 1
    for i in range(1, n):
        if items[i] == items[i - 1]:
            return 0, tuple(items)
    return sign, tuple(items)


def perm_sign(idx: Sequence[int]) -> int:
    return sort_with_sign(idx)[0]


def increasing(n: int, k: int) -> list[tuple[int, ...]]:
    """All strictly increasing k-tuples from range(n), lexicographic."""
    if k < 0 or k > n:
        return []
    return list(combinations(range(n), k))


def splits(K: tuple[int, ...], p: int) -> Iterable[tuple[int, tuple[int, ...], tuple[int, ...]]]:
    """Yield (sign, S, K minus S) over p-subsets S of the increasing tuple K.

    The sign is that of the shuffle putting S in front of the rest.
    """
    n = len(K)
    for pos in combinations(range(n), p):
        S = tuple(K[i] for i in pos)
        rest = tuple(K[i] for i in range(n) if i not in pos)
        # shuffle sign: (-1)^(sum of positions - p(p-1)/2)
        sgn = -1 if (sum(pos) - p * (p - 1) // 2) % 2 else 1
        yield sgn, S, rest


def remove_at(t: tuple[int, ...], i: int) -> tuple[int, ...]:
    return t[:i] + t[i + 1:]

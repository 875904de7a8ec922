"""Acceptance suite: one test per criterion, exact integer tolerances, one
printed pass/fail line each (run with -s to see them inline)."""

import random
import time
from math import comb

import numpy as np
import pytest

from sheafcoh import linalg
from sheafcoh.beilinson import (beilinson_monad2, monad_homology_check,
                                monad_map_checks, monad_term_formula_check,
                                omega_functor, strand_module)
from sheafcoh.bgg import (L_complex, L_module, ModuleComplex, R_complex,
                          R_module, acyclicity_check,
                          adjunction_condition_matrix, core_from_vector,
                          extract_core_from_R_map,
                          extract_core_from_module_map,
                          realize_chain_map_to_R, realize_chain_map_to_module,
                          verify_chain_map_to_R, verify_chain_map_to_module)
from sheafcoh.complexes import linear_part, minimize
from sheafcoh.emodules import (free_resolution, k_module, kernel_module,
                               lin_module, linear_part_oracle, module_of_free,
                               omega_mod_power)
from sheafcoh.generators import (elliptic_quartic, hook_dim_oracle,
                                 horrocks_mumford_matrix, max_ideal_power,
                                 omega_module, rnc_module,
                                 twisted_structure_sheaf)
from sheafcoh.rings import RingSig
from sheafcoh.smodules import FPModuleS, as_pieces, koszul_tor, modules_isomorphic
from sheafcoh.tate import (betti_table, cohomology_table, linear_monad,
                           oracle_line_bundle, tate_from_ematrix,
                           tate_from_module)

from randgen import random_e_module, random_fp_module

P = 32003


def report(criterion, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"\n[acceptance {criterion}] {status} {detail}")
    assert ok, f"criterion {criterion} failed: {detail}"


# -------------------------------------------------------------------------
# 1. elliptic quartic window and linear monad
# -------------------------------------------------------------------------

def test_criterion_1_elliptic_quartic():
    t0 = time.time()
    M = elliptic_quartic(1, P)
    win = tate_from_module(M, 3, -3, 3)
    bt = betti_table(win)
    v = 4
    pattern = {(-1, 2, 8), (0, 1, 4), (0, 0, 1), (1, -1, 4), (1, 0, 1),
               (2, -2, 8)}
    got = {(e, v - g, r) for (e, g, r) in bt.multiset() if -1 <= e <= 2}
    terms_ok = got == pattern
    G, rep = linear_monad(win, (-4, 6))
    monad_ok = {k: G.term(k).gen_degrees for k in G.positions()} == {
        -2: (2,) * 8, -1: (1,) * 20, 0: (0,) * 16, 1: (-1,) * 4}
    elapsed = time.time() - t0
    report(1, terms_ok and monad_ok and elapsed < 10,
           f"window+monad exact, {elapsed:.1f}s (<10s)")


# -------------------------------------------------------------------------
# 2. Horrocks-Mumford
# -------------------------------------------------------------------------

def test_criterion_2_horrocks_mumford():
    t0 = time.time()
    win = tate_from_ematrix(horrocks_mumford_matrix(P), -4, 6)
    bt = betti_table(win)
    rows = {
        4: {-4: 100, -3: 35, -2: 4},
        3: {-3: 2, -2: 10, -1: 10, 0: 5},
        2: {1: 2},
        1: {2: 5, 3: 10, 4: 10, 5: 2},
        0: {4: 4, 5: 35, 6: 100},
    }
    want = {(j, e): r for j, row in rows.items() for e, r in row.items()}
    table_ok = bt.entries == want
    cert = win.provenance["sheaf_certificate"]
    ct = cohomology_table(win, (0, 4), (-9, 7))
    chis = [ct.euler(m) for m in range(-4, 3)]
    diffs = [chis[i + 4] - 4 * chis[i + 3] + 6 * chis[i + 2]
             - 4 * chis[i + 1] + chis[i] for i in range(len(chis) - 4)]
    chi_ok = len(diffs) >= 3 and all(d == 2 for d in diffs)
    elapsed = time.time() - t0
    report(2, table_ok and cert["certified"] and chi_ok and elapsed < 60,
           f"betti table, row confinement, 4th diff of chi = 2, "
           f"{elapsed:.1f}s (<60s)")


# -------------------------------------------------------------------------
# 3. rational normal curves
# -------------------------------------------------------------------------

def test_criterion_3_rational_normal_curves():
    t0 = time.time()
    ok = True
    for (d, k) in ((3, 0), (4, 1), (4, -1), (5, 2)):
        M = rnc_module(d, k, 0, 10, P)
        win = tate_from_module(M, 2, -3, 3, assume_regular=True)
        bt = betti_table(win)
        for e in range(-3, 4):
            n0 = k + e * d + 1
            want0 = n0 if n0 > 0 else 0
            n1 = k + (e - 1) * d
            want1 = -n1 - 1 if n1 < -1 else 0
            ok &= bt.entry(0, e) == want0
            ok &= bt.entry(1, e) == want1
            ok &= all(bt.entry(j, e) == 0 for j in range(2, d + 1))
        if k == -1:
            # middle matrix: square of size d with quadric entries, as in
            # the paper's displayed 4x4 example (see decisions ledger)
            mid = win.complex.diff(0)
            ok &= mid.source.rank == d and mid.target.rank == d
            entry_words = {bin(m).count("1")
                           for row in mid.entries for p_ in row
                           for m in p_.terms}
            ok &= entry_words == {2}
    elapsed = time.time() - t0
    report(3, ok and elapsed < 30,
           f"strand formulas + middle quadric matrix, {elapsed:.1f}s (<30s)")


# -------------------------------------------------------------------------
# 4. cotangent powers and powers of the maximal ideal
# -------------------------------------------------------------------------

def test_criterion_4_section5_fixtures():
    t0 = time.time()
    ok = True
    for v in (3, 4, 5):
        ring = RingSig("S", v, P)
        for p_ in range(0, v):
            M = omega_module(ring, p_)   # Omega^p(p): regularity 1
            win = tate_from_module(M, 2, -3, 3, assume_regular=True)
            bt = betti_table(win)
            for e in range(-3, 4):
                if e == 0:
                    want = 1
                elif e > 0:
                    want = hook_dim_oracle(P, v, p_ + 1, e)
                else:
                    want = hook_dim_oracle(P, v, v - p_, -e)
                ok &= bt.column_rank(e) == want
            ct = cohomology_table(win, (0, v - 1), (-3, 2))
            for q in range(0, v):
                for j in range(0, v):
                    got = ct.entry(q, -j)
                    if got is not None:
                        ok &= got == (1 if (q == p_ and j == p_) else 0)
        ringE = RingSig("E", v, P)
        for j in range(1, v + 1):
            res = free_resolution(max_ideal_power(ringE, j), 3)
            for kk in range(0, 4):
                ok &= res.complex.term(-kk).rank == \
                    hook_dim_oracle(P, v, j, kk + 1)
    elapsed = time.time() - t0
    report(4, ok and elapsed < 30,
           f"Prop 5.5 tables, delta pattern, hook Betti numbers, "
           f"{elapsed:.1f}s (<30s)")


# -------------------------------------------------------------------------
# 5. property suites
# -------------------------------------------------------------------------

def test_criterion_5a_tor_and_ext_double_computation():
    rng = random.Random(20101)
    cases = 0
    while cases < 100:
        v = rng.choice((2, 2, 3))
        M = random_fp_module(rng, v)
        pieces = M.pieces(-1, 6)
        cx = R_module(pieces, -1, 4)
        for i in range(0, 4):
            for j in range(i - 1, i + 3):
                assert cx.homology_dim(i, j) == koszul_tor(M, j - i, j)
        cases += 1
    rng = random.Random(20102)
    cases = 0
    while cases < 100:
        v = rng.choice((2, 3))
        Pmod = random_e_module(rng, v)
        from sheafcoh.emodules import ext_E_K
        cx = L_module(Pmod)
        if not cx.terms:
            continue
        for i in range(cx.lo, cx.hi + 1):
            for j in range(-3, 4):
                assert cx.homology_dim(i, j) == ext_E_K(Pmod, i + j, j)
        cases += 1
    report("5a", True, "Tor/Ext double computations agree (2x100 cases)")


def test_criterion_5b_adjunction_roundtrip():
    rng = random.Random(20103)
    np_rng = np.random.default_rng(20104)
    cases = 0
    while cases < 100:
        v = 2
        M = random_fp_module(rng, v).pieces(-1, 7)
        Pc = R_module(M.truncate(0), 0, 2)
        cond = adjunction_condition_matrix(Pc, M)
        basis = linalg.kernel_basis(cond, P)
        if basis.shape[1] == 0:
            continue
        co = np_rng.integers(0, P, basis.shape[1])
        core = core_from_vector(Pc, M, (basis @ co) % P)
        RM, psi = realize_chain_map_to_R(Pc, M, core, 0, 2)
        assert verify_chain_map_to_R(Pc, RM, psi, 0, 2)
        LP, Phi = realize_chain_map_to_module(Pc, M, core, 0, 3)
        assert verify_chain_map_to_module(LP, M, Phi, 0, 3)
        assert all(np.array_equal(core[i] % P,
                                  extract_core_from_R_map(Pc, M, psi)[i] % P)
                   for i in Pc.positions())
        assert all(np.array_equal(
            core[i] % P, extract_core_from_module_map(Pc, M, LP, Phi)[i] % P)
            for i in Pc.positions())
        cases += 1
    report("5b", True, "adjunction round-trip identity (100 cases)")


def test_criterion_5c_LR_resolves():
    rng = random.Random(20105)
    cases = 0
    while cases < 100:
        v = rng.choice((2, 3))
        M = random_fp_module(rng, v)
        pieces = M.pieces(-1, 7)
        lr = L_complex(R_module(pieces, -1, 4))
        for j in range(0, 3):
            assert lr.homology_dim(0, j) == pieces.dim(j)
        for i in range(lr.lo + 1, 0):
            for j in range(0, 3):
                assert lr.homology_dim(i, j) == 0
        cases += 1
    report("5c", True, "LR(M) resolves with H^0 Hilbert = M (100 cases)")


def test_criterion_5d_linear_part_oracle():
    rng = random.Random(20106)
    cases = 0
    while cases < 100:
        v = rng.choice((2, 3))
        Pmod = random_e_module(rng, v)
        res = free_resolution(Pmod, 2)
        lp = linear_part(res.complex)
        orc = linear_part_oracle(res.complex)
        for i in range(res.complex.lo, res.complex.hi):
            assert lp.diff(i).entries == orc.diff(i).entries
        cases += 1
    report("5d", True, "linear part == connecting-homomorphism oracle "
                       "(100 cases)")


def _example_33_mc():
    S2 = RingSig("S", 2, P)
    x, y = S2.variable(0), S2.variable(1)
    M0 = FPModuleS.from_quotient(S2, [x, y * y]).pieces(-1, 5)
    M1 = FPModuleS.from_quotient(S2, [x * x, y]).pieces(-2, 5).twist(1)
    maps = {0: {j: np.zeros((M1.dim(j), M0.dim(j)), dtype=np.int64)
                for j in range(-1, 5)}}
    maps[0][0] = np.array([[1]], dtype=np.int64)
    return ModuleComplex(S2, {0: M0, 1: M1}, maps, 0, 1)


def test_criterion_5e_lin_of_R_decomposes():
    # Example 3.3 zero-differential case
    mc = _example_33_mc()
    rc = minimize(R_complex(mc, -1, 3))
    lp = linear_part(rc)
    assert all(e.is_zero() for i in range(rc.lo, rc.hi)
               for row in lp.diff(i).entries for e in row)
    want = {}
    for i in (0, 1):
        h = mc.homology_module(i, -1, 3)
        for kk in range(h.lo, h.hi + 1):
            if h.dim(kk):
                pos = i + kk
                want.setdefault(pos, []).extend([kk + 2] * h.dim(kk))
    got = {k: sorted(rc.term(k).gen_degrees) for k in rc.positions()
           if rc.term(k).rank}
    assert got == {k: sorted(vals) for k, vals in want.items()}

    rng = random.Random(20107)
    cases = 0
    while cases < 100:
        v = 2
        A = random_fp_module(rng, v).pieces(-1, 6)
        B = random_fp_module(rng, v).pieces(-1, 6)
        # random degree-0 module map A -> B
        from sheafcoh.smodules import module_hom_space
        homs = module_hom_space(A, B, -1, 5)
        if not homs:
            continue
        coeffs = [rng.randrange(P) for _ in homs]
        fmap = {}
        for j in range(-1, 6):
            acc = linalg.zeros(B.dim(j), A.dim(j))
            for c, fam in zip(coeffs, homs):
                acc = (acc + c * fam[j]) % P
            fmap[j] = acc
        mc2 = ModuleComplex(A.ring, {0: A, 1: B}, {0: fmap}, 0, 1)
        rc2 = minimize(R_complex(mc2, -1, 4))
        lp2 = linear_part(rc2)
        want2 = {}
        for i in (0, 1):
            h = mc2.homology_module(i, -1, 4)
            for kk in range(h.lo, h.hi + 1):
                if h.dim(kk):
                    want2.setdefault(i + kk, []).extend([kk + v] * h.dim(kk))
        got2 = {k: sorted(rc2.term(k).gen_degrees) for k in rc2.positions()
                if rc2.term(k).rank}
        # interior comparison: edge positions carry window truncation noise
        for k in range(rc2.lo + 1, rc2.hi):
            assert got2.get(k, []) == sorted(want2.get(k, []))
        cases += 1
    report("5e", True, "lin(R(G)) decomposes as (+) R(H^i(G)) (100 cases)")


def test_criterion_5f_reciprocity():
    ok = True
    for v in (2, 3, 4, 5):
        ringE = RingSig("E", v, P)
        ringS = RingSig("S", v, P)
        for i in range(0, v):
            Pmod = omega_mod_power(ringE, i)
            LPc = L_module(Pmod)
            LPc.verify()
            # L(P) is a (minimal, linear) free resolution of Omega^i:
            om = omega_module(ringS, i, twist=0)
            pieces = om.pieces(i, i + 4)
            for pos in range(LPc.lo + 1, LPc.hi + 1):
                for j in range(0, 2 * v + 2):
                    h = LPc.homology_dim(pos, j)
                    want = pieces.dim(j) if pos == LPc.hi and \
                        i + 1 <= j <= i + 4 else 0
                    if j <= i + 4:
                        ok &= h == want
            # and R(Omega^i) is the injective resolution of P: exact beyond
            # the start, kernel dims equal to P
            rc = R_module(om.pieces(i, i + v + 3), i + 1, i + v + 2)
            for pos in range(i + 2, i + v + 2):
                ok &= rc.is_exact_at(pos)
            for j in range(0, v + 1):
                ker = kernel_module(rc.diff(i + 1))
                ok &= ker.dim(j) == Pmod.dim(j)
    report("5f", ok, "reciprocity for all (Omega^i, omega/m^{v-i}) pairs, "
                     "v <= 5")


def test_criterion_5g_linear_part_eventually_exact():
    rng = random.Random(20108)
    cases = 0
    found = 0
    flagged = 0
    while cases < 100:
        v = rng.choice((2, 3))
        Pmod = random_e_module(rng, v)
        steps = v + 3
        res = free_resolution(Pmod, steps)
        lp = linear_part(res.complex)
        onset = None
        for k in range(0, steps - 1):
            if all(lp.is_exact_at(-t) for t in range(k + 1, steps - 1)):
                onset = k
                break
        if onset is None:
            flagged += 1   # window too small: flagged, not failed
        else:
            found += 1
        cases += 1
    assert found >= 90   # linear dominance sets in quickly for small inputs
    report("5g", True, f"lin(resolution) eventually exact: onset found in "
                       f"{found}/100 windows, {flagged} flagged")


def test_criterion_5h_deep_syzygy_hilbert_equality():
    rng = random.Random(20109)
    cases = 0
    while cases < 100:
        v = rng.choice((2, 3))
        Pmod = random_e_module(rng, v)
        res = free_resolution(Pmod, v + 2)
        N = kernel_module(res.complex.diffs[-(v + 2)])
        L = lin_module(N)
        assert all(N.dim(j) == L.dim(j) for j in set(N.dims) | set(L.dims))
        cases += 1
    report("5h", True, "deep syzygies have the Hilbert function of their "
                       "linear degeneration (100 cases)")


# -------------------------------------------------------------------------
# 6. Beilinson monads
# -------------------------------------------------------------------------

def _safe_truncation(M, start, limit=8):
    for d in range(start, start + limit):
        if acyclicity_check(M, d, M.ring.v + 1):
            return d + 1
    raise AssertionError("no linear truncation found")


def _twisted_tables(MF, n, positions):
    """Per q, the Betti table of T(F (x) Omega^q(q)), wide enough to read
    h^{j+q}(F (x) Omega^q(q)) for every monad position j."""
    ringS = MF.ring
    tables = {}
    elo = min(positions)
    ehi = max(positions) + n
    for q in range(0, n + 1):
        T = MF if q == 0 else MF.tensor(omega_module(ringS, q))
        d = _safe_truncation(T, 1)
        win = tate_from_module(T, d, elo - 1, max(ehi, d) + 1,
                               assume_regular=True, verify=False)
        tables[q] = betti_table(win)
    return tables


def test_criterion_6_beilinson():
    t0 = time.time()
    ok = True
    cases = []
    S3 = RingSig("S", 3, P)
    S4 = RingSig("S", 4, P)
    cases.append(("O_P2", FPModuleS.free(S3, (0,)), 1))
    cases.append(("O(1)_P2", twisted_structure_sheaf(S3, 1), 1))
    cases.append(("Omega1(1)_P2", omega_module(S3, 1), 2))
    cases.append(("O_P3", FPModuleS.free(S4, (0,)), 1))
    cases.append(("O(1)_P3", twisted_structure_sheaf(S4, 1), 1))
    cases.append(("Omega1(1)_P3", omega_module(S4, 1), 2))
    cases.append(("elliptic_P3", elliptic_quartic(1, P), 3))
    for name, MF, trunc in cases:
        n = MF.ring.v - 1
        win = tate_from_module(MF, trunc, -4, 4, assume_regular=True)
        oc = omega_functor(win, -2, 2)
        oc.verify()
        ok &= monad_term_formula_check(win, oc, (0, n))
        hom = monad_homology_check(oc, MF, trunc, trunc + 2)
        ok &= hom["ok"]
        maps = monad_map_checks(win, MF, trunc, (0, n))
        ok &= maps["ok"]
        # strand 0 assembles into the section module itself
        sm = strand_module(win, 0, max(0, trunc - 1), 3)
        ok &= modules_isomorphic(sm, as_pieces(MF, max(0, trunc - 1), 3),
                                 max(0, trunc - 1), 3)
        mm, rep = beilinson_monad2(win, -2, 2)
        tables = _twisted_tables(MF, n, range(-2, 3))
        for pos in range(-2, 3):
            counts = rep.get(pos, {})
            for q in range(0, n + 1):
                want = tables[q].entry(pos + q, pos + q)
                ok &= counts.get(q, 0) == want
        if not ok:
            report(6, False, f"failure at {name}")
    elapsed = time.time() - t0
    report(6, ok and elapsed < 120,
           f"term formula, homology, map checks, detection "
           f"({len(cases)} sheaves), {elapsed:.1f}s (<120s)")


# -------------------------------------------------------------------------
# 7. line bundle oracle
# -------------------------------------------------------------------------

def test_criterion_7_line_bundle_oracle():
    t0 = time.time()
    ok = True
    for n in (1, 2, 3, 4):
        ring = RingSig("S", n + 1, P)
        win = tate_from_module(FPModuleS.free(ring, (0,)), 1, n - 8, 8,
                               verify=False)
        ct = cohomology_table(win, (0, n), (-8 - n, 8))
        for d in range(-8, 9):
            for j in range(0, n + 1):
                got = ct.entry(j, d)
                if got is not None:
                    ok &= got == oracle_line_bundle(n, j, d)
    elapsed = time.time() - t0
    report(7, ok and elapsed < 10,
           f"cohomology of O(d) on P^n vs binomial oracle, "
           f"{elapsed:.1f}s (<10s)")

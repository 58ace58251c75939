import itertools

import pytest

import bacforge.affine as aff
from bacforge import (
    affine_plane,
    certify_plan,
    default_params,
    greedy_plan,
    random_bac,
    redundancy_bound,
    total_length,
    trial_verify,
)


@pytest.mark.parametrize("q", [2, 3, 5])
def test_plane_invariants(q):
    plane = affine_plane(q)
    assert len(plane.lines) + len(plane.verticals) == q * q + q
    all_lines = [line.points for line in plane.lines] + list(plane.verticals)
    assert all(len(pts) == q for pts in all_lines)
    for a, b in itertools.combinations(all_lines, 2):
        assert len(set(a) & set(b)) <= 1
    for p1, p2 in itertools.combinations(range(1, q * q + 1), 2):
        containing = [pts for pts in all_lines if p1 in set(pts) and p2 in set(pts)]
        assert len(containing) == 1


def test_each_point_on_q_plus_1_lines():
    q = 5
    plane = affine_plane(q)
    for pt in range(1, q * q + 1):
        nonvertical = len(plane.through[pt - 1])
        vertical_hits = sum(1 for v in plane.verticals if pt in v)
        assert nonvertical + vertical_hits == q + 1


def test_affine_plane_requires_prime():
    with pytest.raises(ValueError):
        affine_plane(4)


def test_degenerate_draw_q3():
    apc = random_bac(3, 1, 1.0, 1.0, seed=5)
    assert apc.m == 6
    assert total_length(apc.code) == 18
    # every parity column is a full-line indicator
    for bucket in apc.code.buckets[3:]:
        for colv in bucket:
            assert sum(colv) == 3
    assert random_bac(3, 3, 1.0, 1.0, seed=5).m == 2


def test_systematic_invariant():
    apc = random_bac(5, 2, 0.7, 0.4, seed=11)
    n = apc.code.n
    identity_cols = []
    for bucket in apc.code.buckets[: apc.info_buckets]:
        identity_cols.extend(bucket)
    assert sorted(identity_cols) == sorted(
        tuple(1 if d == i else 0 for d in range(n)) for i in range(n)
    )
    for bucket in apc.code.buckets[: apc.info_buckets]:
        for colv in bucket:
            assert sum(colv) == 1


def test_seed_determinism():
    a = random_bac(5, 2, 0.5, 0.3, seed=77)
    b = random_bac(5, 2, 0.5, 0.3, seed=77)
    assert a.code == b.code and a.selected == b.selected and a.point_sets == b.point_sets
    c = random_bac(5, 2, 0.5, 0.3, seed=78)
    assert c.code != a.code or c.selected != a.selected


def test_short_final_buckets_when_s_does_not_divide_q():
    apc = random_bac(5, 3, 1.0, 1.0, seed=1)
    assert apc.m == 4  # 2 * ceil(5/3)
    # last info bucket holds the remaining 2 verticals
    assert len(apc.code.buckets[0]) == 15 and len(apc.code.buckets[1]) == 10


def test_parameter_validation():
    with pytest.raises(ValueError):
        random_bac(4, 1, 0.5, 0.5, seed=0)  # not prime
    with pytest.raises(ValueError):
        random_bac(5, 6, 0.5, 0.5, seed=0)  # s > q
    with pytest.raises(ValueError):
        random_bac(5, 2, 0.0, 0.5, seed=0)
    with pytest.raises(ValueError):
        random_bac(5, 2, 0.5, 1.5, seed=0)


def test_default_params_clamping():
    d = default_params(5, 2, 2)
    assert d.p1 == 1.0 and d.p1_clamped
    assert abs(d.p1_raw - 368.5) < 1.0
    assert abs(d.p2 - 0.1118) < 1e-3 and not d.p2_clamped
    assert not d.in_theory_regime


def test_redundancy_bound_values_and_monotonicity():
    import math

    n = 101 * 101
    expected = n + 64 * 8 * n**0.75 * math.log(n)
    assert abs(redundancy_bound(101, 2, 2) - expected) < 1e-6
    assert redundancy_bound(101, 3, 2) > redundancy_bound(101, 2, 2)
    assert redundancy_bound(101, 2, 3) > redundancy_bound(101, 2, 2)


def test_greedy_singleton_uses_info_bucket():
    apc = random_bac(5, 2, 0.5, 0.3, seed=4)
    for point in (1, 7, 25):
        plan = greedy_plan(apc, (point,))
        assert plan is not None
        assert certify_plan(apc.code, (point,), plan)
        assert apc.info_bucket_of(point) in plan.sets[0]


def test_greedy_duplicate_pair_q3():
    apc = random_bac(3, 1, 1.0, 1.0, seed=9)
    plan = greedy_plan(apc, (5, 5))
    assert plan is not None and certify_plan(apc.code, (5, 5), plan)
    first, second = plan.sets
    assert apc.info_bucket_of(5) in first
    assert len(first) == 1
    # the second copy reads a full line: two other info buckets + slope bucket
    assert any(b > apc.info_buckets for b in second)


def test_greedy_absent_case_exists_q3():
    apc = random_bac(3, 1, 1.0, 1.0, seed=9)
    stuck = None
    for k in range(2, apc.m + 1):
        for req in itertools.combinations_with_replacement(range(1, 10), k):
            if greedy_plan(apc, req) is None:
                stuck = req
                break
        if stuck:
            break
    assert stuck is not None
    assert greedy_plan(apc, stuck) is None


def test_strict_appendix_mode():
    apc = random_bac(3, 1, 1.0, 1.0, seed=9)
    # without the direct-bucket shortcut even a single request must use a line
    plan = greedy_plan(apc, (1,), strict_appendix=True)
    assert plan is not None
    assert any(b > apc.info_buckets for b in plan.sets[0])
    assert certify_plan(apc.code, (1,), plan)


def test_trial_verify_reports():
    apc = random_bac(5, 1, 1.0, 1.0, seed=21)
    rep = trial_verify(apc, 1, 50, seed=3)
    assert rep.successes == 50 and rep.success_rate == 1.0
    rep2 = trial_verify(apc, 1, 50, seed=3)
    assert rep.to_json_dict() == rep2.to_json_dict()
    rep3 = trial_verify(apc, 2, 200, seed=3)
    assert rep3.successes + len(rep3.failures) == 200


def test_trial_verify_sharding_is_order_independent():
    apc = random_bac(13, 2, 1.0, 1.0, seed=424242)
    serial = trial_verify(apc, 2, 60, seed=3)
    sharded = trial_verify(apc, 2, 60, seed=3, jobs=2)
    assert serial.to_json_dict() == sharded.to_json_dict()


def test_provenance_round_trip():
    apc = random_bac(5, 2, 0.5, 0.25, seed=123)
    prov = apc.provenance()
    assert prov["family"] == "affine" and prov["rng"] == aff.RNG_ID
    rebuilt = aff.rebuild_from_provenance(prov)
    assert rebuilt.code == apc.code


def test_selection_concentration_smoke():
    q, p1 = 13, 0.3
    n = q * q
    sizes = [len(random_bac(q, 2, p1, 0.2, seed=s).selected) for s in range(40)]
    mean = sum(sizes) / len(sizes)
    assert abs(mean - p1 * n) / (p1 * n) < 0.15

"""Smoke test for the ktri extension module.

Build and install first:
    pip install -e crates/python --no-build-isolation
"""

import json
import pathlib
import sys
import tempfile

import ktri

ROOT = pathlib.Path(__file__).resolve().parent.parent


def check(label, cond):
    print(f"{'ok  ' if cond else 'FAIL'} {label}")
    return cond


def main():
    results = []
    m = ktri.SetFunction.measuroid(3)
    results.append(check("measuroid m({1,3}) = 10/9", m.eval([1, 3]) == "10/9"))
    results.append(check("measuroid m({1,2,3}) = 31/36", m.eval([1, 2, 3]) == "31/36"))
    results.append(check("measuroid is 1-triangular", m.is_k_triangular(1)))
    results.append(check("measuroid is not 0-triangular", m.k_triangular_witness(0) is not None))
    results.append(check("minimal k is 1/1", m.minimal_k() == "1/1"))
    mono = m.is_monotone()
    results.append(
        check("non-monotone witness ({1,3}, {1,2,3})", mono["witness"]["sets"] == [[1, 3], [1, 2, 3]])
    )
    table = {tuple(s): (v, arg) for s, v, arg in m.semivariation_table()}
    results.append(check("v(m)(ground) = 10/9 at {1,3}", table[(1, 2, 3)] == ("10/9", [1, 3])))
    results.append(check("semivariation is monotone", m.semivariation().is_monotone()["verdict"] == "HOLDS-AT-HORIZON"))

    fam = ktri.Family.scaled(m, 6)
    gaps = fam.schur_gap()
    results.append(check("schur gap (10/9)/j", [g for _, g, _ in gaps[:3]] == ["10/9", "5/9", "10/27"]))
    report = fam.harness("S", random_phis=20)
    results.append(check("scaled family consistent under S", report["verdict"] == "CONSISTENT"))
    hump = ktri.Family.hump(6).harness("BJ", random_phis=20)
    results.append(check("hump family hypothesis not met", hump["verdict"] == "HYPOTHESIS-NOT-MET"))

    reg = ktri.Regulator([["1", "1/2", "1/3", "1/4"]])
    cert = ktri.converges(["1", "1/2", "1/3", "1/4"], 0, reg, [[4], [2], [1]])
    results.append(check("1/n converges to 0 against 1/l", cert["verdict"] == "HOLDS-AT-HORIZON"))
    results.append(check("regulator sup", reg.sup([2]) == "1/2"))

    run = ktri.drewnowski("alternating-power 2", 4)
    results.append(check("drewnowski extraction holds", run["certificate"]["verdict"] == "HOLDS-AT-HORIZON"))
    try:
        ktri.drewnowski("harmonic", 2)
        results.append(check("harmonic weights rejected", False))
    except ktri.KtriError:
        results.append(check("harmonic weights rejected", True))

    fixture = (ROOT / "fixtures" / "measuroid-3.json").read_text()
    loaded = ktri.SetFunction.from_json(fixture)
    results.append(check("fixture round trip", loaded.values() == m.values()))
    results.append(check("json round trip", ktri.SetFunction.from_json(m.to_json()).values() == m.values()))

    with tempfile.TemporaryDirectory() as tmp:
        checks = ktri.corpus_verify(tmp, regenerate=True)
        ok = all(c["checksum_ok"] and c["regenerates"] and all(e["ok"] for e in c["expectations"]) for c in checks)
        results.append(check(f"regenerated corpus verifies ({len(checks)} fixtures)", ok))

    passed = sum(results)
    print(json.dumps({"passed": passed, "total": len(results)}))
    return 0 if passed == len(results) else 1


if __name__ == "__main__":
    sys.exit(main())

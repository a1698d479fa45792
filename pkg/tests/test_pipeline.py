"""Pipeline assembly: labels, theory inputs, serializers, manifests, bundles.

The heavy numeric checks live in the per-module files and in the
acceptance suite; here the focus is the glue: every serialized artifact
keeps its schema and the bundle is JSON-clean and reproducible.
"""

from __future__ import annotations

import csv
import io
import json
import math

import pytest

from hypdim import (
    BoundInput,
    ConfigError,
    InsufficientBranches,
    Lattice,
    Polynomial,
    TanPower,
    Verdict,
    WeierstrassP,
    EllipticComposePoly,
    ExpElliptic,
)
from hypdim.config import FamilyBlock, PipelineBlock, RunConfig, config_hash
from hypdim.pipeline import (
    bound_rows_csv,
    branches_csv,
    boxcount_csv,
    family_label,
    make_family,
    manifest_dict,
    preimages_csv,
    report_bundle,
    run_numeric,
    run_render,
    samples_csv,
    theory_input,
    to_json,
)


class TestFamilyGlue:
    def test_make_family_variants(self):
        assert isinstance(make_family(FamilyBlock(variant="tan")), TanPower)
        assert isinstance(make_family(FamilyBlock(variant="weierstrass")), WeierstrassP)
        assert isinstance(
            make_family(FamilyBlock(variant="elliptic_poly")), EllipticComposePoly
        )
        assert isinstance(
            make_family(FamilyBlock(variant="exp_elliptic", d=2)), ExpElliptic
        )

    def test_complex_fields_parsed(self):
        fam = make_family(FamilyBlock(variant="tan", lam="2i", m=2))
        assert fam.lam == 2j and fam.m == 2

    def test_labels(self, square_lattice):
        assert family_label(TanPower(m=3)) == "tan_power_m3"
        assert family_label(WeierstrassP(square_lattice)) == "elliptic_q2"
        assert (
            family_label(EllipticComposePoly(square_lattice, Polynomial((0, 0, 1))))
            == "elliptic_poly_d2"
        )
        assert family_label(ExpElliptic(1.0, 4, square_lattice)) == "exp_elliptic_d4"

    def test_theory_input(self, square_lattice):
        inp = theory_input(ExpElliptic(1.0, 3, square_lattice))
        assert inp == BoundInput(rho=2.0, alpha1=0.0, q=6)
        inp = theory_input(EllipticComposePoly(square_lattice, Polynomial((0, 0, 1))))
        assert inp == BoundInput(rho=4.0, alpha1=1.0, q=2)


class TestNumericRun:
    def test_tan_run_shape(self, tan_run):
        assert tan_run.label == "tan_power_m1"
        assert len(tan_run.branches) >= 200
        assert tan_run.theta.theta_hat == pytest.approx(0.5, abs=0.05)
        assert abs(tan_run.rho_hat - 1.0) < 0.1
        assert tan_run.bound.verdict is Verdict.CONSISTENT
        # koebe distortion shrinks the one-level root
        assert tan_run.bowen_koebe <= tan_run.bowen_off

    def test_wp_run_shape(self, wp_run):
        assert wp_run.label == "elliptic_q2"
        assert len(wp_run.branches) >= 100
        assert wp_run.theta.theta_hat == pytest.approx(4.0 / 3.0, abs=0.1)
        assert abs(wp_run.rho_hat - 2.0) < 0.1
        assert wp_run.bound.verdict is Verdict.CONSISTENT

    def test_bowen_bounds_theta(self, tan_run, wp_run):
        for run in (tan_run, wp_run):
            sel = run.bowen_koebe if run.config.pipeline.distortion == "koebe" else run.bowen_off
            assert sel <= run.bound.theoretical + 0.05

    def test_family_block_required(self):
        with pytest.raises(ConfigError):
            run_numeric(RunConfig())

    def test_empty_regression_window_rejected(self):
        rc = RunConfig(
            family=FamilyBlock(variant="tan"),
            pipeline=PipelineBlock(regression_rmin=5.0, regression_rmax=2.0),
        )
        with pytest.raises(ConfigError):
            run_numeric(rc)

    def test_undersized_radius_is_loud(self):
        rc = RunConfig(family=FamilyBlock(variant="tan"), pipeline=PipelineBlock(radius=1.0))
        with pytest.raises(InsufficientBranches):
            run_numeric(rc)


class TestSerializers:
    def test_preimages_csv_schema(self, tan_run):
        text = preimages_csv(tan_run.anchors)
        rows = list(csv.DictReader(io.StringIO(text)))
        assert list(rows[0].keys()) == ["re", "im", "modulus", "residual"]
        assert len(rows) == len(tan_run.anchors)
        first = tan_run.anchors[0]
        assert float(rows[0]["re"]) == pytest.approx(first.point.real)
        assert float(rows[0]["modulus"]) == pytest.approx(first.modulus)

    def test_empty_preimages_csv_keeps_header(self):
        assert preimages_csv([]) == "re,im,modulus,residual\n"

    def test_branches_csv_schema(self, tan_run):
        text = branches_csv(tan_run.branches)
        rows = list(csv.DictReader(io.StringIO(text)))
        assert list(rows[0].keys()) == [
            "index",
            "z_re",
            "z_im",
            "w_re",
            "w_im",
            "phi_deriv_mag",
            "sheet",
        ]
        assert int(rows[0]["index"]) == tan_run.branches[0].index
        assert len(rows) == len(tan_run.branches)

    def test_samples_csv(self, tan_run):
        text = samples_csv(tan_run.samples)
        rows = list(csv.DictReader(io.StringIO(text)))
        assert list(rows[0].keys()) == ["radius", "count"]
        assert len(rows) == len(tan_run.samples)

    def test_bound_rows_csv(self, tan_run):
        text = bound_rows_csv([tan_run.bound])
        lines = text.strip().split("\n")
        assert lines[0] == "family_label,rho,alpha1,q,theoretical,theta_hat,bowen_root,verdict"
        assert len(lines) == 2
        assert lines[1].startswith("tan_power_m1,")
        assert lines[1].endswith(Verdict.CONSISTENT.value)

    def test_boxcount_csv(self):
        assert boxcount_csv((4, 8), (100, 30)) == "box_size,count\n4,100\n8,30\n"


class TestManifestAndBundle:
    def test_manifest_has_no_timestamps(self):
        rc = RunConfig(family=FamilyBlock(variant="tan"))
        man = manifest_dict(rc)
        assert set(man.keys()) == {"config_hash", "resolved_config", "seed", "versions"}
        assert man["config_hash"] == config_hash(rc)
        # regenerating the manifest gives identical bytes
        assert to_json(man) == to_json(manifest_dict(rc))

    def test_bundle_is_json_clean(self, tan_run):
        bundle = report_bundle(tan_run)
        text = to_json(bundle)
        back = json.loads(text)
        assert back["family_label"] == "tan_power_m1"
        assert back["bound"]["verdict"] == "Consistent"
        assert back["theta"]["theta_hat"] == pytest.approx(tan_run.theta.theta_hat)
        assert back["n_branches"] == len(tan_run.branches)
        assert "render" not in back

    def test_bundle_with_render(self, tan_run):
        rc = RunConfig(family=FamilyBlock(variant="tan"))
        rr = run_render(rc)
        bundle = report_bundle(tan_run, rr)
        back = json.loads(to_json(bundle))
        assert back["render"]["signal_mask"] in ("boundary", "undecided")
        assert back["render"]["pixels_x"] == 512
        if back["render"]["box_dimension"] is not None:
            assert 0.0 <= back["render"]["box_dimension"] <= 2.0

    def test_render_respects_frame(self, wp_family):
        rc = RunConfig(
            family=FamilyBlock(variant="weierstrass"),
            pipeline=PipelineBlock(threads=2),
        )
        rr = run_render(rc)
        assert rr.result.status.shape == (512, 512)
        assert rr.mask.shape == (512, 512)

"""Command layer: validated request in, summary plus artifact texts out.

Both the HTTP service and the CLI call these functions, so a local run
and a remote run produce byte-identical artifacts. Nothing here touches
the filesystem; artifacts are returned as complete file contents keyed
by file name and the caller decides where they land.

Error contract: schema problems surface as pydantic validation errors
before these functions run; a ValueError here is a config-level mistake
(unknown word, inconsistent knobs), IntegrityError marks a structural
check that should never fail, and calibration/fit non-convergence comes
through as the respective module exceptions.
"""

from __future__ import annotations

import dataclasses
import hashlib
import io
import json
import math
import re

import numpy as np

from . import orbit as orbit_mod
from .channels import NoiseModel, depolarizing, noise_model_from_spec
from .fitting import DecayFit, fit_decay, interleaved_error, reference_error
from .groups import Group, GroupConstructionError, avg_word_length, build_group, frame_potential
from .pulse import PulseParams, PulseSimConfig, calibrate, pulse_noise_model
from .rb import RBConfig, RBCurve, RBResult, run_rb
from .schemas import (
    BuildGroupRequest,
    CalibrateRequest,
    CommandResponse,
    FitRequest,
    OrbitRequest,
    PulseParamsDoc,
    PulseSettings,
    RBRunRequest,
    VerifyDesignsRequest,
)

EXPECTED_DESIGN_ORDER = {"tetrahedral": 2, "octahedral": 3, "icosahedral": 5}

CSV_HEADER = "m,mean_fidelity,stderr,k"


class IntegrityError(Exception):
    """A structural property the package guarantees failed to hold."""


def dump_json(obj) -> str:
    """Canonical artifact JSON: sorted keys, two-space indent, newline."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def config_hash(request) -> str:
    """12-hex-digit digest of the canonicalized request document.

    The thread count is an execution detail with no effect on the numbers,
    so it is dropped before hashing: the same run at a different thread
    count must stay byte-identical.
    """
    doc = request.model_dump(mode="json")
    doc.pop("threads", None)
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def curve_csv(curve: RBCurve, k: int, digest: str) -> str:
    out = io.StringIO()
    out.write(f"# config_hash={digest}\n")
    out.write(CSV_HEADER + "\n")
    for pt in curve.points:
        out.write(f"{pt.m},{_fmt(pt.mean_fidelity)},{_fmt(pt.std_error)},{k}\n")
    return out.getvalue()


def _fit_report(fit: DecayFit, group_kind: str, curve: str, digest: str, **extra) -> dict:
    r = reference_error(fit)
    report = {
        "A": fit.A,
        "B": fit.B,
        "p": fit.p,
        "p_std_error": fit.p_std_error,
        "r": r,
        "F": 1.0 - r,
        "residual_norm": fit.residual_norm,
        "flags": list(fit.flags),
        "group_kind": group_kind,
        "curve": curve,
        "config_hash": digest,
    }
    report.update(extra)
    return report


def _word_slug(word: str) -> str:
    return re.sub(r"[^A-Za-z0-9.-]+", "_", word.strip())


def build_group_command(req: BuildGroupRequest) -> CommandResponse:
    group = build_group(req.kind)
    summary = {
        "kind": group.kind,
        "order": group.order,
        "class_sizes": group.class_sizes(),
        "average_word_length": str(avg_word_length(group)),
        "average_word_length_float": float(avg_word_length(group)),
    }
    if req.kind == "octahedral":
        tetra = build_group("tetrahedral")
        subset = 0
        for el in group.elements:
            try:
                tetra.find_bloch(el.bloch)
                subset += 1
            except KeyError:
                pass
        summary["tetrahedral_subset_size"] = subset
        if subset != tetra.order:
            raise IntegrityError(
                f"octahedral group contains {subset} tetrahedral elements, expected {tetra.order}"
            )
    artifacts = {f"group_{req.kind}.json": dump_json(group.to_json_dict())}
    return CommandResponse(summary=summary, artifacts=artifacts)


def verify_designs_command(req: VerifyDesignsRequest) -> CommandResponse:
    group = build_group(req.kind)
    rows = []
    measured = 0
    consecutive = True
    for t in range(1, req.t_max + 1):
        fp = frame_potential(group, t)
        target = math.comb(2 * t, t) // (t + 1)
        passed = abs(fp - target) <= 1e-9
        if not passed and fp < target - 1e-9:
            raise IntegrityError(
                f"frame potential below its lower bound at t={t}: {fp} < {target}"
            )
        if passed and consecutive:
            measured = t
        else:
            consecutive = False
        rows.append({"t": t, "frame_potential": fp, "target": target, "passed": passed})
    expected = EXPECTED_DESIGN_ORDER[req.kind]
    summary = {
        "kind": req.kind,
        "rows": rows,
        "design_order": measured,
        "expected_design_order": expected,
    }
    if req.t_max > expected and measured != expected:
        raise IntegrityError(
            f"{req.kind} certifies as a {measured}-design, expected {expected}"
        )
    artifacts = {f"designs_{req.kind}.json": dump_json(summary)}
    return CommandResponse(summary=summary, artifacts=artifacts)


def _pulse_config(settings: PulseSettings) -> PulseSimConfig:
    kwargs = {"levels": settings.levels, "time_step": settings.time_step}
    if settings.anharmonicity is not None:
        kwargs["anharmonicity"] = settings.anharmonicity
    return PulseSimConfig(**kwargs)


def _params_from_doc(doc: PulseParamsDoc) -> PulseParams:
    return PulseParams(
        xy_amplitudes=dict(doc.xy_amplitudes),
        z_amplitudes=dict(doc.z_amplitudes),
        drag_coefficient=doc.drag_coefficient,
        xy_duration=doc.xy_duration_ns,
        z_duration=doc.z_duration_ns,
    )


def _rb_noise(req: RBRunRequest, group: Group):
    gates = group.gate_alphabet(include_idle=True)
    if req.mode == "gate-level":
        if req.noise is None:
            raise ValueError("gate-level runs need a noise model")
        noise = noise_model_from_spec(req.noise.model, req.noise.params, gates)
        if req.inject is not None:
            idx = group.find_word(req.inject.word)
            extras = {idx: depolarizing(2.0 * req.inject.extra_error)}
            noise = dataclasses.replace(noise, element_extras=extras)
        return noise
    if req.noise is not None:
        raise ValueError("pulse-level runs take pulse settings, not a gate-level noise model")
    if req.inject is not None:
        raise ValueError("error injection is only defined for gate-level runs")
    settings = req.pulse or PulseSettings()
    cfg = _pulse_config(settings)
    params = (
        _params_from_doc(req.pulse_params)
        if req.pulse_params is not None
        else calibrate(cfg, group.kind)
    )
    return pulse_noise_model(params, cfg, gates, t1=settings.t1, tphi=settings.tphi)


def run_rb_command(req: RBRunRequest) -> CommandResponse:
    digest = config_hash(req)
    artifacts: dict[str, str] = {}
    curves_summary = []
    m_values = tuple(req.m_values) if req.m_values is not None else None

    for kind in req.group_kinds:
        group = build_group(kind)
        noise = _rb_noise(req, group)

        def run(interleaved: int | None) -> RBResult:
            return run_rb(
                RBConfig(
                    group_kind=kind,
                    noise=noise,
                    seed=req.seed,
                    m_values=m_values,
                    k=req.k,
                    interleaved=interleaved,
                    shots=req.shots,
                    threads=req.threads,
                )
            )

        reference = run(None)
        ref_fit = fit_decay(reference.reference.fit_points())
        artifacts[f"rb_{kind}_reference.csv"] = curve_csv(reference.reference, req.k, digest)
        artifacts[f"fit_{kind}_reference.json"] = dump_json(
            _fit_report(ref_fit, kind, "reference", digest)
        )
        curves_summary.append(
            {"group_kind": kind, "curve": "reference", "p": ref_fit.p, "r": reference_error(ref_fit)}
        )

        for word in req.interleaved:
            idx = group.find_word(word)
            result = run(idx)
            gate_fit = fit_decay(result.interleaved.fit_points())
            r_gate = interleaved_error(gate_fit.p, ref_fit.p)
            slug = _word_slug(word)
            artifacts[f"rb_{kind}_interleaved_{slug}.csv"] = curve_csv(
                result.interleaved, req.k, digest
            )
            artifacts[f"fit_{kind}_interleaved_{slug}.json"] = dump_json(
                _fit_report(
                    gate_fit,
                    kind,
                    f"interleaved:{word}",
                    digest,
                    p_reference=ref_fit.p,
                    r_gate=r_gate,
                )
            )
            curves_summary.append(
                {
                    "group_kind": kind,
                    "curve": f"interleaved:{word}",
                    "p": gate_fit.p,
                    "r_gate": r_gate,
                }
            )

    summary = {"config_hash": digest, "curves": curves_summary}
    return CommandResponse(summary=summary, artifacts=artifacts)


def calibrate_command(req: CalibrateRequest) -> CommandResponse:
    cfg = _pulse_config(req.pulse)
    params = calibrate(cfg, req.group_kind)
    digest = config_hash(req)
    doc = params.to_json_dict()
    doc.update(
        {
            "group_kind": req.group_kind,
            "parameter_count": params.parameter_count(),
            "config_hash": digest,
        }
    )
    summary = {
        "group_kind": req.group_kind,
        "parameter_count": params.parameter_count(),
        "drag_coefficient": params.drag_coefficient,
        "config_hash": digest,
    }
    return CommandResponse(
        summary=summary, artifacts={f"pulse_params_{req.group_kind}.json": dump_json(doc)}
    )


def orbit_command(req: OrbitRequest) -> CommandResponse:
    if req.pulse.t1 is not None or req.pulse.tphi is not None:
        raise ValueError("the tuning objective is decoherence-free; drop t1/tphi")
    cfg = _pulse_config(req.pulse)
    digest = config_hash(req)
    start = (
        _params_from_doc(req.start_params)
        if req.start_params is not None
        else calibrate(cfg, req.group_kind)
    )
    if req.perturb_amplitudes > 0.0:
        rng = np.random.default_rng([req.perturb_seed])
        frac = req.perturb_amplitudes
        start = dataclasses.replace(
            start,
            xy_amplitudes={
                k: v * (1.0 + rng.uniform(-frac, frac)) for k, v in start.xy_amplitudes.items()
            },
            z_amplitudes={
                k: v * (1.0 + rng.uniform(-frac, frac)) for k, v in start.z_amplitudes.items()
            },
        )
    fixed_m = (
        req.fixed_m
        if req.fixed_m is not None
        else orbit_mod.recommended_fixed_m(start, req.group_kind, cfg)
    )
    spec = orbit_mod.ObjectiveSpec(
        group_kind=req.group_kind,
        template=start,
        fixed_m=fixed_m,
        n_sequences=req.n_sequences,
        seed=req.seed,
        sim_config=cfg,
    )
    result = orbit_mod.orbit_tune(start, spec, req.budget)
    doc = result.params.to_json_dict()
    doc.update(
        {
            "group_kind": req.group_kind,
            "parameter_count": result.params.parameter_count(),
            "config_hash": digest,
            "start_objective": result.start_objective,
            "tuned_objective": result.tuned_objective,
            "heldout_start": result.heldout_start,
            "heldout_tuned": result.heldout_tuned,
            "evaluations": result.evaluations,
            "reverted": result.reverted,
            "fixed_m": fixed_m,
        }
    )
    summary = {
        k: doc[k]
        for k in (
            "group_kind",
            "parameter_count",
            "config_hash",
            "start_objective",
            "tuned_objective",
            "heldout_start",
            "heldout_tuned",
            "evaluations",
            "reverted",
            "fixed_m",
        )
    }
    trace_csv = f"# config_hash={digest}\n" + orbit_mod.trace_to_csv(result.trace)
    return CommandResponse(
        summary=summary,
        artifacts={
            f"orbit_params_{req.group_kind}.json": dump_json(doc),
            f"orbit_trace_{req.group_kind}.csv": trace_csv,
        },
    )


def parse_curve_csv(text: str) -> list[tuple[int, float, float]]:
    """Read (m, mean_fidelity, stderr) rows from a curve CSV."""
    rows = []
    header_seen = False
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != CSV_HEADER:
                raise ValueError(f"unexpected CSV header {line!r}")
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise ValueError(f"expected 4 columns, got {len(parts)}")
        rows.append((int(parts[0]), float(parts[1]), float(parts[2])))
    if not header_seen:
        raise ValueError("missing CSV header")
    if not rows:
        raise ValueError("no data rows")
    return rows


def fit_command(req: FitRequest) -> CommandResponse:
    rows = parse_curve_csv(req.csv_text)
    # any zero stderr poisons inverse-variance weighting; fall back to uniform
    if any(stderr <= 0 for _, _, stderr in rows):
        points = [(m, f, 1.0) for m, f, _ in rows]
    else:
        points = [(m, f, 1.0 / (stderr * stderr)) for m, f, stderr in rows]
    fit = fit_decay(points)
    digest = config_hash(req)
    report = _fit_report(fit, "", "refit", digest)
    del report["group_kind"]
    summary = {"p": fit.p, "r": report["r"], "config_hash": digest}
    return CommandResponse(summary=summary, artifacts={"fit.json": dump_json(report)})

"""Certificate files: sorted-key JSON holding any subset of the LP pair,
the flow, the potential, and metadata tying them to one instance."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from . import __version__
from .errors import BibranchError, CertificateError, InfeasibleInput
from .graph import Instance, format_instance
from .lp import LpDual, comp_slack_check, dual_feasible, objectives, primal_feasible
from .msf import Potential, check_optimal_potential, flow_feasible, msf_objective
from .verdict import PASS, Verdict

PRODUCER = f"bibranch {__version__}"


def fnv1a_64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def instance_digest(inst: Instance) -> str:
    return f"{fnv1a_64(format_instance(inst).encode('utf-8')):016x}"


def encode_rational(val) -> int | str:
    val = Fraction(val)
    return val.numerator if val.denominator == 1 else f"{val.numerator}/{val.denominator}"


def decode_rational(raw) -> Fraction:
    if isinstance(raw, bool) or not isinstance(raw, (int, str)):
        raise CertificateError(f"expected an integer or 'num/den' string, got {raw!r}")
    try:
        return Fraction(raw)
    except (ValueError, ZeroDivisionError):
        raise CertificateError(f"bad rational {raw!r}") from None


@dataclass
class Certificate:
    primal_x: dict[int, Fraction] | None = None
    dual: LpDual | None = None
    flow_xi: frozenset[int] | None = None
    potential: Potential | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> str:
        doc: dict[str, Any] = {"meta": self.meta}
        if self.primal_x is not None:
            vals = {i: v for i, v in self.primal_x.items() if v}
            if all(v == 1 for v in vals.values()):
                doc["primal_x"] = sorted(vals)
            else:
                doc["primal_x"] = [[i, encode_rational(v)] for i, v in sorted(vals.items())]
        if self.dual is not None:
            for key, part in (("dual_y", self.dual.y), ("dual_z", self.dual.z)):
                entries = [{"subset": sorted(X), "value": encode_rational(v)} for X, v in part.items()]
                doc[key] = sorted(entries, key=lambda e: (len(e["subset"]), e["subset"]))
        if self.flow_xi is not None:
            doc["flow_xi"] = sorted(self.flow_xi)
        if self.potential is not None:
            doc["potential_p"] = [[u, val] for u, val in sorted(self.potential.p.items())]
            doc["potential_q"] = [[v, val] for v, val in sorted(self.potential.q.items())]
        lines = [f"{json.dumps(key)}: {json.dumps(doc[key], sort_keys=True, ensure_ascii=False)}"
                 for key in sorted(doc)]
        return "{\n" + ",\n".join(lines) + "\n}\n"

    @classmethod
    def from_json(cls, text: str) -> Certificate:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise CertificateError(f"certificate is not valid JSON: {e}") from None
        if not isinstance(doc, dict):
            raise CertificateError("certificate must be a JSON object")
        cert = cls(meta=doc.get("meta") or {})
        try:
            if "primal_x" in doc:
                cert.primal_x = {}
                for item in doc["primal_x"]:
                    if isinstance(item, list):
                        cert.primal_x[_index(item[0])] = decode_rational(item[1])
                    else:
                        cert.primal_x[_index(item)] = Fraction(1)
            if ("dual_y" in doc) != ("dual_z" in doc):
                raise CertificateError("dual_y and dual_z must appear together")
            if "dual_y" in doc:
                parts = []
                for key in ("dual_y", "dual_z"):
                    part = {}
                    for e in doc[key]:
                        X = frozenset(_index(v) for v in e["subset"])
                        if X in part:
                            raise CertificateError(f"repeated subset {sorted(X)} in {key}")
                        part[X] = decode_rational(e["value"])
                    parts.append(part)
                cert.dual = LpDual(*parts)
            if "flow_xi" in doc:
                cert.flow_xi = frozenset(_index(i) for i in doc["flow_xi"])
            if ("potential_p" in doc) != ("potential_q" in doc):
                raise CertificateError("potential_p and potential_q must appear together")
            if "potential_p" in doc:
                cert.potential = Potential({_index(u): _int(v) for u, v in doc["potential_p"]},
                                           {_index(v): _int(x) for v, x in doc["potential_q"]})
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, CertificateError):
                raise
            raise CertificateError(f"malformed certificate: {e}") from None
        return cert


def _int(raw) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise CertificateError(f"expected an integer, got {raw!r}")
    return raw


def _index(raw) -> int:
    if _int(raw) < 0:
        raise CertificateError(f"negative index {raw}")
    return raw


def check_indices(inst: Instance, cert: Certificate):
    m = len(inst.arcs)
    if cert.primal_x is not None and any(i >= m for i in cert.primal_x):
        raise CertificateError("primal_x refers to a missing arc")
    if cert.flow_xi is not None and not cert.flow_xi <= set(inst.arcs_ST):
        raise CertificateError("flow_xi must list S-T arcs only")
    if cert.potential is not None:
        if set(cert.potential.p) != set(inst.S) or set(cert.potential.q) != set(inst.T):
            raise CertificateError("potential_p / potential_q must cover exactly S / T")
        if cert.flow_xi is None:
            raise CertificateError("a potential needs the flow it certifies")


def verify_certificate(inst: Instance, cert: Certificate) -> Verdict:
    """Check every section present; the first failure is returned.

    Raises :class:`CertificateError` for digest mismatches and sections that
    do not fit the instance.
    """
    digest = cert.meta.get("digest")
    if digest is not None and digest != instance_digest(inst):
        raise CertificateError("certificate digest does not match the instance")
    check_indices(inst, cert)
    values = {}
    if cert.primal_x is not None:
        v = primal_feasible(inst, cert.primal_x)
        if not v:
            return Verdict(False, f"primal infeasible: {v.reason}", v.witness)
    if cert.dual is not None:
        v = dual_feasible(inst, cert.dual)
        if not v:
            return v
    if cert.primal_x is not None and cert.dual is not None:
        try:
            v = comp_slack_check(inst, cert.primal_x, cert.dual)
        except InfeasibleInput as e:
            return Verdict(False, str(e))
        if not v:
            return Verdict(False, f"complementary slackness fails: {v.reason}", v.witness)
        pv, dv = objectives(inst, cert.primal_x, cert.dual)
        if pv != dv:
            return Verdict(False, f"primal value {pv} differs from dual value {dv}")
        values["primal"] = values["dual"] = pv
    elif cert.primal_x is not None:
        values["primal"] = objectives(inst, cert.primal_x, LpDual())[0]
    elif cert.dual is not None:
        values["dual"] = cert.dual.value
    if cert.flow_xi is not None:
        if not flow_feasible(inst, cert.flow_xi):
            return Verdict(False, "flow infeasible: its boundary cannot be completed on both sides")
        values["msf"] = Fraction(msf_objective(inst, cert.flow_xi))
        if cert.potential is not None:
            try:
                v = check_optimal_potential(inst, cert.flow_xi, cert.potential)
            except BibranchError as e:
                return Verdict(False, f"potential check failed: {e}")
            if not v:
                return Verdict(False, f"potential does not certify the flow: {v.reason}", v.witness)
    if len(set(values.values())) > 1:
        return Verdict(False, "values disagree: " + ", ".join(f"{k}={v}" for k, v in sorted(values.items())))
    for key, claimed in (cert.meta.get("values") or {}).items():
        if key in values and decode_rational(claimed) != values[key]:
            return Verdict(False, f"claimed {key} value {claimed} differs from computed {values[key]}")
    return PASS


def meta_for(inst: Instance, cert: Certificate) -> dict[str, Any]:
    values = {}
    if cert.primal_x is not None:
        values["primal"] = encode_rational(objectives(inst, cert.primal_x, LpDual())[0])
    if cert.dual is not None:
        values["dual"] = encode_rational(cert.dual.value)
    if cert.flow_xi is not None:
        values["msf"] = encode_rational(msf_objective(inst, cert.flow_xi))
    return {"digest": instance_digest(inst), "producer": PRODUCER, "values": values}

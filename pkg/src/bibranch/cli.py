"""Command-line front end.

Exit codes: 0 ok / verified, 1 verification failed, 2 infeasible, 3 input error.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from .bridge import lp_cert_from_potential, potentials_from_lp_dual, tighten_potential
from .certificate import Certificate, check_indices, instance_digest, meta_for, verify_certificate
from .errors import (BibranchError, CertificateError, Infeasible, InputNotOptimal, InstanceError,
                     NotOptimalFlow, NotOptimalPotential, UnboundedDual)
from .graph import format_instance, parse_instance
from .lp import solve_dual_integral
from .msf import check_optimal_potential, find_optimal_potential, solve_msf
from .testkit import GenConfig, brute_min_bibranching, gen_instance

OK, FAILED, INFEASIBLE, INPUT_ERROR = 0, 1, 2, 3


class InputError(Exception):
    pass


def _read_instance(path):
    try:
        return parse_instance(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise InputError(f"cannot read instance: {e}") from None
    except InstanceError as e:
        raise InputError(f"bad instance: {e}") from None


def _read_certificate(path, inst):
    try:
        cert = Certificate.from_json(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise InputError(f"cannot read certificate: {e}") from None
    except CertificateError as e:
        raise InputError(str(e)) from None
    if cert.meta.get("digest") not in (None, instance_digest(inst)):
        raise InputError("certificate digest does not match the instance")
    try:
        check_indices(inst, cert)
    except CertificateError as e:
        raise InputError(str(e)) from None
    return cert


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_solve(args) -> int:
    inst = _read_instance(args.input)
    try:
        if args.method == "brute":
            best = brute_min_bibranching(inst)
            value = best.value
        else:
            best = solve_msf(inst, "brute" if args.method == "msf" else "benders")
            value = best.value
    except (Infeasible, UnboundedDual):
        print("infeasible")
        return INFEASIBLE
    print(value)
    if not args.certify:
        return OK
    if args.method == "brute":
        x = {i: Fraction(1) for i in best.arcs}
        xi, pot = potentials_from_lp_dual(inst, x, solve_dual_integral(inst).dual)
    else:
        xi = best.flow
        pot = find_optimal_potential(inst, xi)
    pot = tighten_potential(inst, xi, pot)
    lp = lp_cert_from_potential(inst, xi, pot)
    cert = Certificate(lp.x, lp.dual, xi, pot)
    cert.meta = meta_for(inst, cert)
    _write(args.output or f"{args.input}.cert.json", cert.to_json())
    return OK


def cmd_verify(args) -> int:
    inst = _read_instance(args.input)
    cert = _read_certificate(args.cert, inst)
    verdict = verify_certificate(inst, cert)
    if verdict:
        print("verified")
        return OK
    print(verdict.reason)
    return FAILED


def cmd_translate(args) -> int:
    inst = _read_instance(args.input)
    cert = _read_certificate(args.cert, inst)
    if args.direction == "lp2msf":
        if cert.primal_x is None or cert.dual is None:
            raise InputError("lp2msf needs primal_x, dual_y and dual_z")
        try:
            cert.flow_xi, cert.potential = potentials_from_lp_dual(inst, cert.primal_x, cert.dual)
        except InputNotOptimal as e:
            print(f"translation failed: {e}")
            return FAILED
        target = check_optimal_potential(inst, cert.flow_xi, cert.potential)
    else:
        if cert.flow_xi is None or cert.potential is None:
            raise InputError("msf2lp needs flow_xi, potential_p and potential_q")
        try:
            tight = tighten_potential(inst, cert.flow_xi, cert.potential)
            lp = lp_cert_from_potential(inst, cert.flow_xi, tight)
        except (NotOptimalPotential, NotOptimalFlow, ValueError) as e:
            print(f"translation failed: {e}")
            return FAILED
        cert.primal_x, cert.dual = lp.x, lp.dual
        target = verify_certificate(inst, Certificate(lp.x, lp.dual))
    if not target:
        print(f"translation failed: {target.reason}")
        return FAILED
    cert.meta = meta_for(inst, cert)
    _write(args.output, cert.to_json())
    return OK


def cmd_gen(args) -> int:
    try:
        inst = gen_instance(GenConfig(args.seed, args.ns, args.nt, args.arcs, args.wmax))
    except (ValueError, InstanceError) as e:
        raise InputError(str(e)) from None
    _write(args.output, format_instance(inst))
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bibranch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve an instance, optionally writing a certificate")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--method", choices=("brute", "msf", "benders"), default="msf")
    p.add_argument("--certify", action="store_true")
    p.add_argument("-o", "--output", help="certificate path (default: INPUT.cert.json)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="verify a certificate against an instance")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-c", "--cert", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("translate", help="derive the other formulation's certificate")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-c", "--cert", required=True)
    p.add_argument("--direction", choices=("lp2msf", "msf2lp"), required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("gen", help="write a random instance")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--ns", type=int, required=True)
    p.add_argument("--nt", type=int, required=True)
    p.add_argument("--arcs", type=int, required=True)
    p.add_argument("--wmax", type=int, default=8)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return INPUT_ERROR if e.code else OK
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return INPUT_ERROR
    except CertificateError as e:
        print(f"error: {e}", file=sys.stderr)
        return INPUT_ERROR
    except BibranchError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return FAILED

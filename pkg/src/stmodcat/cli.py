"""Command-line front end: declarative session files, one command per
engine operation, deterministic tables and JSON.

Session grammar (line oriented, '#' starts a comment):

    ring p=<prime> m=<int>
    module <Name> = [i1,...,ik]
    module <Name> = matrix [[...],...]
    map <f>: <A> -> <B> = mu(x^j) | blocks [[...],...] | matrix [[...],...]
    sthom A B
    cone f
    fiber f
    bracket <cc|fc|ff> f3 f2 f1
    nbracket [j1,...] fn ... f1
    adams M gen=<G> len=<n>
    page r
    dr x r
    drforms x r
    heller f g h
    sparse G N window

Exit codes: 0 success, 1 engine error, 2 parse/validation error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys

import numpy as np

from .linalg import EnumerationOverflow, FpMatrix
from .modrep import (
    ModRepError,
    RMap,
    RModule,
    Ring,
    block_map,
    jordan_type,
    module_from_partition,
    module_iso,
    mu_map,
    partition_layout,
)
from .stcat import (
    StCatError,
    Triangle,
    cone_triangle,
    fiber_triangle,
    stable_hom,
)
from .toda import BracketError, BracketSet, bracket3, higher_bracket
from .adams import (
    AdamsError,
    ProjectiveClass,
    adams_resolution,
    dr_bracket_forms,
    dr_set,
    pages,
    sparse_check,
)
from .heller import heller_check


class SessionError(Exception):
    """Parse or validation failure; carries the offending line number."""

    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class EngineFailure(Exception):
    """An engine error attributed to a command."""

    def __init__(self, lineno, command, message):
        super().__init__(f"line {lineno}: {command}: {message}")


_MU_RE = re.compile(r"^(?:(\d+)\*)?mu\((?:1|x(?:\^(\d+))?)\)$")


def _parse_mu_term(tok: str):
    """(coeff, power) of a 'c*mu(x^j)' term, or None when it is not one."""
    m = _MU_RE.match(tok.strip())
    if not m:
        return None
    coeff = int(m.group(1)) if m.group(1) else 1
    body = tok[tok.index("(") + 1:-1]
    if body == "1":
        power = 0
    elif m.group(2) is not None:
        power = int(m.group(2))
    else:
        power = 1
    return coeff, power


def _parse_int_grid(text: str, lineno: int):
    try:
        grid = json.loads(text)
    except json.JSONDecodeError as e:
        raise SessionError(lineno, f"bad matrix literal: {e}")
    if (not isinstance(grid, list) or not grid
            or not all(isinstance(r, list) for r in grid)):
        raise SessionError(lineno, "matrix literal must be a list of rows")
    return grid


def _parse_cell_grid(text: str, lineno: int) -> list[list[str]]:
    """[[cell, cell], [cell, ...]] with mu-term or 0 cells, as strings."""
    text = text.strip()
    if not (text.startswith("[[") and text.endswith("]]")):
        raise SessionError(lineno, "block grid must look like [[...],[...]]")
    rows = re.split(r"\]\s*,\s*\[", text[2:-2])
    return [[cell.strip() for cell in row.split(",")] for row in rows]


class Session:
    def __init__(self, max_enumerate=4096):
        self.ring: Ring | None = None
        self.modules: dict[str, RModule] = {}
        self.partitions: dict[str, list[int] | None] = {}
        self.maps: dict[str, RMap] = {}
        self.commands: list[tuple[int, list[str]]] = []
        self.cap = max_enumerate
        self.resolution = None
        self.resolution_target: RModule | None = None

    # -- declaration handling ------------------------------------------------

    def declare_ring(self, lineno, args):
        kv = dict(a.split("=", 1) for a in args if "=" in a)
        if set(kv) != {"p", "m"}:
            raise SessionError(lineno, "ring needs p=<prime> m=<int>")
        try:
            self.ring = Ring(int(kv["p"]), int(kv["m"]))
        except (ValueError, ModRepError) as e:
            raise SessionError(lineno, str(e))

    def declare_module(self, lineno, name, rhs):
        if self.ring is None:
            raise SessionError(lineno, "module declared before the ring")
        if name in self.modules:
            raise SessionError(lineno, f"module name {name!r} reused")
        rhs = rhs.strip()
        try:
            if rhs.startswith("matrix"):
                grid = _parse_int_grid(rhs[len("matrix"):].strip(), lineno)
                mod = RModule(self.ring, FpMatrix(self.ring.p, grid))
                self.partitions[name] = None
            else:
                parts = json.loads(rhs)
                if not isinstance(parts, list):
                    raise SessionError(lineno, "partition must be a list")
                mod = module_from_partition(self.ring, parts)
                self.partitions[name] = list(parts)
        except SessionError:
            raise
        except Exception as e:
            raise SessionError(lineno, f"bad module declaration: {e}")
        self.modules[name] = mod

    def _block_entry(self, lineno, entry: str, a, b):
        if entry == "0":
            return None
        term = _parse_mu_term(entry)
        if term is None:
            raise SessionError(lineno, f"bad block entry {entry!r}")
        coeff, j = term
        try:
            return mu_map(self.ring, a, b, j, coeff)
        except ModRepError as e:
            raise SessionError(lineno, str(e))

    def declare_map(self, lineno, name, src_name, tgt_name, rhs):
        if name in self.maps:
            raise SessionError(lineno, f"map name {name!r} reused")
        for n in (src_name, tgt_name):
            if n not in self.modules:
                raise SessionError(lineno, f"unknown module {n!r}")
        src, tgt = self.modules[src_name], self.modules[tgt_name]
        rhs = rhs.strip()
        try:
            if rhs.startswith("matrix"):
                grid = _parse_int_grid(rhs[len("matrix"):].strip(), lineno)
                f = RMap(src, tgt, FpMatrix(self.ring.p, grid))
            elif rhs.startswith("blocks"):
                sp = self.partitions.get(src_name)
                tp = self.partitions.get(tgt_name)
                if sp is None or tp is None:
                    raise SessionError(
                        lineno, "blocks maps need partition-declared modules")
                grid = _parse_cell_grid(rhs[len("blocks"):].strip(), lineno)
                if len(grid) != len(tp) or any(len(r) != len(sp) for r in grid):
                    raise SessionError(lineno, "block grid shape mismatch")
                entries = [[self._block_entry(lineno, grid[i][j], sp[j], tp[i])
                            for j in range(len(sp))] for i in range(len(tp))]
                srcs = [module_from_partition(self.ring, [l]) for l in sp]
                tgts = [module_from_partition(self.ring, [l]) for l in tp]
                f0 = block_map(srcs, tgts, entries)
                f = RMap(src, tgt, f0.A)
            else:
                term = _parse_mu_term(rhs)
                if term is None:
                    raise SessionError(lineno, f"bad map declaration {rhs!r}")
                sp = self.partitions.get(src_name)
                tp = self.partitions.get(tgt_name)
                if sp is None or tp is None or len(sp) != 1 or len(tp) != 1:
                    raise SessionError(
                        lineno, "mu maps need single-block partition modules")
                coeff, j = term
                f0 = mu_map(self.ring, sp[0], tp[0], j, coeff)
                f = RMap(src, tgt, f0.A)
        except SessionError:
            raise
        except Exception as e:
            raise SessionError(lineno, f"map is not R-linear or malformed: {e}")
        self.maps[name] = f

    def get_map(self, lineno, name) -> RMap:
        if name not in self.maps:
            raise SessionError(lineno, f"unknown map {name!r}")
        return self.maps[name]

    def get_module(self, lineno, name) -> RModule:
        if name not in self.modules:
            raise SessionError(lineno, f"unknown module {name!r}")
        return self.modules[name]


# ---------------------------------------------------------------------------
# labels


def _format_block(sub: np.ndarray, p: int) -> str:
    """Express one block of a map between canonical blocks in mu terms."""
    b, a = sub.shape
    terms = []
    for j in range(max(a, b) + 1):
        diag = [sub[i + j, i] for i in range(a) if i + j < b]
        if not diag:
            continue
        c = diag[0]
        if any(d != c for d in diag):
            return "?"
        if c:
            if j == 0:
                base = "mu(1)"
            elif j == 1:
                base = "mu(x)"
            else:
                base = f"mu(x^{j})"
            terms.append(base if c == 1 else f"{c}*{base}")
    # entries off the mu diagonals must vanish
    recon = np.zeros_like(sub)
    for t in terms:
        coeff, j = _parse_mu_term(t)
        for i in range(a):
            if i + j < b:
                recon[i + j, i] = coeff
    if not np.array_equal(recon % p, sub % p):
        return "?"
    return "+".join(terms) if terms else "0"


def mu_label(f: RMap) -> str:
    """A mu-basis label for a map between canonical-form modules."""
    sparts = partition_layout(f.src)
    tparts = partition_layout(f.tgt)
    if sparts is None or tparts is None:
        return "?"
    rows = []
    roff = 0
    for bt in tparts:
        cols = []
        coff = 0
        for bs in sparts:
            sub = f.A.a[roff:roff + bt, coff:coff + bs]
            cols.append(_format_block(sub, f.src.ring.p))
            coff += bs
        rows.append(cols)
        roff += bt
    if len(rows) == 1 and len(rows[0]) == 1:
        return rows[0][0]
    return "[" + "; ".join(" ".join(r) for r in rows) + "]"


def bracket_labels(bs: BracketSet) -> list[str]:
    space = stable_hom(bs.src, bs.tgt)
    return [mu_label(space.from_stable_coords(
        tuple(1 if i == k else 0 for i in range(space.sdim))))
        for k in range(space.sdim)]


# ---------------------------------------------------------------------------
# command execution


class Report:
    def __init__(self, session: Session):
        self.session = session
        self.lines: list[str] = []
        self.results: list[dict] = []

    def emit(self, text: str, payload: dict):
        self.lines.append(text)
        self.results.append(payload)


def _bracket_payload(cmdname, names, bs: BracketSet) -> dict:
    out = {
        "command": cmdname,
        "maps": names,
        "elements": [list(e) for e in bs.sorted_elements()],
        "basis_labels": bracket_labels(bs),
        "indeterminacy_rank": (len(bs.indeterminacy)
                               if bs.indeterminacy is not None else None),
    }
    if bs.empty_reason:
        out["empty_reason"] = bs.empty_reason
    return out


def _bracket_text(title, bs: BracketSet) -> str:
    if bs.is_empty():
        return f"{title}: empty ({bs.empty_reason})"
    labels = bracket_labels(bs)
    elems = ", ".join("(" + ",".join(str(c) for c in e) + ")"
                      for e in bs.sorted_elements())
    rank = (len(bs.indeterminacy) if bs.indeterminacy is not None else "-")
    return (f"{title}: {{{elems}}}  basis [{', '.join(labels)}]"
            f"  indeterminacy rank {rank}")


def run_command(sess: Session, rep: Report, lineno: int, toks: list[str]):
    cmd = toks[0]
    cap = sess.cap
    if cmd == "sthom":
        A = sess.get_module(lineno, toks[1])
        B = sess.get_module(lineno, toks[2])
        S = stable_hom(A, B)
        labels = [mu_label(S.from_stable_coords(
            tuple(1 if i == k else 0 for i in range(S.sdim))))
            for k in range(S.sdim)]
        rep.emit(f"sthom {toks[1]} {toks[2]}: dim {S.sdim}"
                 f"  basis [{', '.join(labels)}]",
                 {"command": "sthom", "src": toks[1], "tgt": toks[2],
                  "dim": S.sdim, "basis_labels": labels})
    elif cmd in ("cone", "fiber"):
        f = sess.get_map(lineno, toks[1])
        t = cone_triangle(f) if cmd == "cone" else fiber_triangle(f)
        obj = t.g.tgt if cmd == "cone" else t.f.src
        rep.emit(f"{cmd} {toks[1]}: type {list(jordan_type(obj))}",
                 {"command": cmd, "map": toks[1],
                  "jordan_type": list(jordan_type(obj))})
    elif cmd == "bracket":
        defn = toks[1]
        names = toks[2:5]
        f3, f2, f1 = (sess.get_map(lineno, n) for n in names)
        bs = bracket3(f3, f2, f1, defn=defn, cap=cap)
        rep.emit(_bracket_text(f"bracket {defn} {' '.join(names)}", bs),
                 _bracket_payload("bracket", names, bs) | {"defn": defn})
    elif cmd == "nbracket":
        if toks[1].startswith("["):
            jseq = json.loads(toks[1])
            names = toks[2:]
        else:
            jseq = None
            names = toks[1:]
        maps = [sess.get_map(lineno, n) for n in names]
        bs = higher_bracket(maps, jseq=jseq, cap=cap)
        rep.emit(_bracket_text(f"nbracket {' '.join(names)}", bs),
                 _bracket_payload("nbracket", names, bs)
                 | {"jseq": list(bs.metadata["jseq"])})
    elif cmd == "adams":
        M = sess.get_module(lineno, toks[1])
        kv = dict(a.split("=", 1) for a in toks[2:] if "=" in a)
        G = sess.get_module(lineno, kv["gen"])
        length = int(kv["len"])
        cls = ProjectiveClass(G)
        sess.resolution = adams_resolution(M, cls, length)
        sess.resolution_target = M
        types = [list(jordan_type(X)) for X in sess.resolution.X]
        ptypes = [list(jordan_type(P)) for P in sess.resolution.P]
        d1 = mu_label(sess.resolution.d1op(0))
        rep.emit(f"adams {toks[1]} gen={kv['gen']} len={length}: "
                 f"X types {types}; P types {ptypes}; d1 {d1}",
                 {"command": "adams", "module": toks[1], "generator": kv["gen"],
                  "length": length, "X_types": types, "P_types": ptypes,
                  "d1_label": d1})
    elif cmd == "page":
        if sess.resolution is None:
            raise SessionError(lineno, "page before adams")
        r = int(toks[1])
        pgs = pages(sess.resolution, sess.resolution_target, r)
        page = pgs[-1]
        dims = {f"{s},{t}": g.dim for (s, t), g in sorted(page.groups.items())}
        rep.emit(f"page {r}: dims {dims}",
                 {"command": "page", "r": r, "dims": dims})
    elif cmd == "dr":
        if sess.resolution is None:
            raise SessionError(lineno, "dr before adams")
        x = _resolution_class(sess, lineno, toks[1])
        r = int(toks[2])
        bs = dr_set(sess.resolution, x.tgt, x, r, cap=cap)
        rep.emit(_bracket_text(f"d_{r}[{toks[1]}]", bs),
                 _bracket_payload("dr", [toks[1]], bs) | {"r": r})
    elif cmd == "drforms":
        if sess.resolution is None:
            raise SessionError(lineno, "drforms before adams")
        x = _resolution_class(sess, lineno, toks[1])
        r = int(toks[2])
        report = dr_bracket_forms(sess.resolution, x.tgt, x, r, cap=cap)
        flags = {
            "full_bracket_equal": report.equal_full,
            "restricted_equal": report.equal_restricted,
            "w_filtered_equal": report.equal_w_filtered,
        }
        flags.update({k: v for k, v in report.checks.items()})
        text = (f"drforms {toks[1]} r={r}: "
                + _bracket_text("d_r", report.dr) + "; "
                + "; ".join(f"{k}={v}" for k, v in sorted(flags.items())))
        payload = {"command": "drforms", "r": r,
                   "dr": _bracket_payload("dr", [toks[1]], report.dr),
                   "flags": {k: (bool(v) if v is not None else None)
                             for k, v in flags.items()}}
        if "with_delta" in report.variants:
            payload["with_delta"] = _bracket_payload(
                "bracket", [], report.variants["with_delta"])
            payload["operations_bracket"] = _bracket_payload(
                "bracket", [], report.variants["operations_bracket"])
        rep.emit(text, payload)
    elif cmd == "heller":
        f, g, h = (sess.get_map(lineno, n) for n in toks[1:4])
        try:
            t = Triangle(f, g, h)
        except StCatError as e:
            raise SessionError(lineno, f"malformed triangle: {e}")
        v = heller_check(t, cap=cap)
        rep.emit(f"heller {' '.join(toks[1:4])}: "
                 f"{'distinguished' if v.distinguished else 'not distinguished'}"
                 f" (exactness {v.exactness_ok}, bracket {v.bracket_ok})",
                 {"command": "heller", "maps": toks[1:4],
                  "distinguished": v.distinguished,
                  "exactness_ok": v.exactness_ok,
                  "bracket_ok": v.bracket_ok})
    elif cmd == "sparse":
        G = sess.get_module(lineno, toks[1])
        N = int(toks[2])
        window = int(toks[3])
        spr = sparse_check(G, N, window)
        rep.emit(f"sparse {toks[1]} N={N} window={window}: "
                 f"{'sparse' if spr.sparse else 'NOT sparse'}"
                 f"{' (vacuously)' if spr.vacuous else ''};"
                 f" nonzero degrees {spr.nonzero_degrees}",
                 {"command": "sparse", "generator": toks[1], "N": N,
                  "window": window, "sparse": spr.sparse,
                  "vacuous": spr.vacuous,
                  "nonzero_degrees": spr.nonzero_degrees})
    else:
        raise SessionError(lineno, f"unknown command {cmd!r}")


def _resolution_class(sess: Session, lineno: int, name: str) -> RMap:
    """A declared map as an E_1 class: transported onto the engine's P_0."""
    x = sess.get_map(lineno, name)
    P0 = sess.resolution.P[0]
    if x.src == P0:
        return x
    iso = module_iso(P0, x.src)
    if iso is None:
        raise SessionError(
            lineno, f"map {name!r} does not start at the degree-0 cover "
                    f"(type {list(jordan_type(P0))})")
    return x @ iso


# ---------------------------------------------------------------------------
# session parsing and the entry point


def parse_session(path: str) -> Session:
    sess = Session()
    decls = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            decls.append((lineno, line))
    for lineno, line in decls:
        toks = line.split()
        if toks[0] == "ring":
            sess.declare_ring(lineno, toks[1:])
        elif toks[0] == "module":
            m = re.match(r"module\s+(\w+)\s*=\s*(.+)$", line)
            if not m:
                raise SessionError(lineno, "bad module declaration")
            sess.declare_module(lineno, m.group(1), m.group(2))
        elif toks[0] == "map":
            m = re.match(r"map\s+(\w+)\s*:\s*(\w+)\s*->\s*(\w+)\s*=\s*(.+)$",
                         line)
            if not m:
                raise SessionError(lineno, "bad map declaration")
            sess.declare_map(lineno, m.group(1), m.group(2), m.group(3),
                             m.group(4))
        else:
            if sess.ring is None:
                raise SessionError(lineno, "command before the ring")
            sess.commands.append((lineno, toks))
    return sess


def run_session(path: str, as_json=False, max_enumerate=4096,
                stream=None) -> int:
    stream = stream or sys.stdout
    try:
        sess = parse_session(path)
        sess.cap = max_enumerate
    except SessionError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    rep = Report(sess)
    for lineno, toks in sess.commands:
        try:
            run_command(sess, rep, lineno, toks)
        except SessionError as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
        except (EnumerationOverflow, BracketError, AdamsError, StCatError,
                ModRepError) as e:
            print(f"error: line {lineno}: {' '.join(toks)}: {e}",
                  file=sys.stderr)
            return 1
    if as_json:
        doc = {
            "ring": {"p": sess.ring.p, "m": sess.ring.m} if sess.ring else None,
            "objects": [{"name": n,
                         "partition": sess.partitions.get(n),
                         "dim": mod.dim}
                        for n, mod in sess.modules.items()],
            "results": rep.results,
        }
        print(json.dumps(doc, indent=2, sort_keys=True), file=stream)
    else:
        for line in rep.lines:
            print(line, file=stream)
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="stmodcat",
        description="Exact Toda bracket / Adams spectral sequence calculator "
                    "for stable module categories of truncated polynomial rings")
    ap.add_argument("session", help="session file to execute")
    ap.add_argument("--json", action="store_true",
                    help="emit one structured JSON document")
    ap.add_argument("--max-enumerate", type=int, default=4096,
                    help="cap on exact enumerations (default 4096)")
    ap.add_argument("--seed", type=int, default=None,
                    help="seed for randomized property commands (unused by "
                         "the deterministic command set)")
    args = ap.parse_args(argv)
    return run_session(args.session, as_json=args.json,
                       max_enumerate=args.max_enumerate)


if __name__ == "__main__":
    sys.exit(main())

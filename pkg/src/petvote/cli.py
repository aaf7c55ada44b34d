"""Command line driver for the election simulator.

State lives in an election directory:

    config.json    election configuration
    secrets.json   simulation-side secret material (teller shares, aux/print keys)
    board.log      the bulletin board (documented line format, see board module)
    sheets.json    printing facility output: the voters' ballot sheets
    sessions.json  cast-session states

Typical session:

    petvote setup --dir demo --voters 3 --options 2
    petvote register --dir demo
    petvote cast --dir demo --voter V000 --choices 1,0
    petvote finalize --dir demo --voter V000 --code <finalization code>
    petvote tally --dir demo
    petvote verify --dir demo
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from . import wire
from .board import Board, verify_board_file
from .elgamal import Cca2KeyPair, Cca2PublicKey, KeyPair, TellerKeyShare
from .group import GroupParams
from .codegen import render_sheet
from .harness import (
    ElectionConfig,
    ConfigError,
    PlatformCheat,
    cast_one,
    experiment_cai,
    experiment_privacy,
    publish_codegen,
    publish_setup,
    run_codegen,
    verify_election,
    voter_ids,
)
from .ot_attack import run_attack_demo
from .protocol import CODES_SENT, CastSession, ElectionContext, VotingServer, setup_election
from .rng import Rng


def _path(d, name):
    return os.path.join(d, name)


def _load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _save_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _shares_to_wire(shares):
    return {
        "commitments": [c.value for c in shares[0].commitment_vector],
        "n": shares[0].n,
        "t": shares[0].t,
        "shares": [{"index": s.index, "share": s.share} for s in shares],
    }


def _shares_from_wire(params, data):
    vector = tuple(params.element(v) for v in data["commitments"])
    return [
        TellerKeyShare(
            index=s["index"],
            share=s["share"],
            commitment_vector=vector,
            public_key=vector[0],
            n=data["n"],
            t=data["t"],
        )
        for s in data["shares"]
    ]


def save_context(directory, ctx: ElectionContext, cfg: ElectionConfig):
    _save_json(
        _path(directory, "secrets.json"),
        {
            "election_id": ctx.election_id,
            "group": ctx.params.to_text(),
            "e": _shares_to_wire(ctx.e_shares),
            "c": _shares_to_wire(ctx.c_shares),
            "aux": {
                "x1": ctx.aux_key.x1,
                "x2": ctx.aux_key.x2,
                "y1": ctx.aux_key.y1,
                "y2": ctx.aux_key.y2,
                "z": ctx.aux_key.z,
                "pk": {
                    "g2": ctx.aux_key.pk.g2.value,
                    "c": ctx.aux_key.pk.c.value,
                    "d": ctx.aux_key.pk.d.value,
                    "h": ctx.aux_key.pk.h.value,
                },
            },
            "print": {"sk": ctx.print_keys.sk, "pk": ctx.print_keys.pk.value},
        },
    )


def load_context(directory) -> tuple[ElectionContext, ElectionConfig]:
    from .encoding import CodeEncoding, OptionEncoding

    with open(_path(directory, "config.json"), "r", encoding="utf-8") as fh:
        cfg = ElectionConfig.from_json(fh.read())
    data = _load_json(_path(directory, "secrets.json"))
    params = GroupParams.from_text(data["group"])
    options = OptionEncoding.build(params, cfg.k)
    codes = CodeEncoding.build(params, cfg.k, cfg.l, cfg.m, cfg.mode, option_encoding=options)
    e_shares = _shares_from_wire(params, data["e"])
    c_shares = _shares_from_wire(params, data["c"])
    aux_pk = Cca2PublicKey(
        g1=params.generator(),
        g2=params.element(data["aux"]["pk"]["g2"]),
        c=params.element(data["aux"]["pk"]["c"]),
        d=params.element(data["aux"]["pk"]["d"]),
        h=params.element(data["aux"]["pk"]["h"]),
    )
    aux = Cca2KeyPair(
        x1=data["aux"]["x1"],
        x2=data["aux"]["x2"],
        y1=data["aux"]["y1"],
        y2=data["aux"]["y2"],
        z=data["aux"]["z"],
        pk=aux_pk,
    )
    ctx = ElectionContext(
        election_id=data["election_id"],
        params=params,
        options=options,
        codes=codes,
        n_tellers=cfg.n_tellers,
        threshold=cfg.threshold,
        e_public=e_shares[0].commitment_vector[0],
        e_shares=e_shares,
        c_public=c_shares[0].commitment_vector[0],
        c_shares=c_shares,
        aux_key=aux,
        print_keys=KeyPair(sk=data["print"]["sk"], pk=params.element(data["print"]["pk"])),
    )
    return ctx, cfg


def _load_server(directory) -> tuple[VotingServer, ElectionConfig, dict]:
    ctx, cfg = load_context(directory)
    board = Board.load(_path(directory, "board.log"))
    rows = [wire.row_from_wire(ctx.params, json.loads(e.payload)) for e in board.read_all("code-table")]
    sheets = {s["voter_id"]: s for s in _load_json(_path(directory, "sheets.json"))}
    server = VotingServer(ctx, board, rows, {vid: s["auth_code"] for vid, s in sheets.items()})
    sessions_path = _path(directory, "sessions.json")
    sessions = _load_json(sessions_path) if os.path.exists(sessions_path) else {}
    for vid, state in sessions.items():
        server.sessions[vid] = CastSession(
            voter_id=vid, state=state["state"], sent_codes=state.get("sent_codes"), alarm=state.get("alarm")
        )
        if state.get("in_box"):
            server.ballot_box.append(
                (vid, wire.ct_from_wire(ctx.params, state["w"]))
            )
    return server, cfg, sheets


def _save_sessions(directory, server: VotingServer):
    sessions = {}
    box = {vid: w for vid, w in server.ballot_box}
    for vid, s in server.sessions.items():
        sessions[vid] = {
            "state": s.state,
            "sent_codes": s.sent_codes,
            "alarm": s.alarm,
            "in_box": vid in box,
        }
        if vid in box:
            sessions[vid]["w"] = wire.ct_to_wire(box[vid])
    _save_json(_path(directory, "sessions.json"), sessions)


def cmd_setup(args) -> int:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = ElectionConfig.from_json(fh.read())
    else:
        cfg = ElectionConfig()
    for name in ("voters", "options", "code_bits", "code_space", "tellers", "threshold", "bits", "lam"):
        value = getattr(args, name, None)
        if value is not None:
            attr = {
                "voters": "n_voters",
                "options": "k",
                "code_bits": "l",
                "code_space": "m",
                "tellers": "n_tellers",
                "threshold": "threshold",
                "bits": "bits",
                "lam": "lam",
            }[name]
            setattr(cfg, attr, value)
    if args.seed is not None:
        cfg.seed = args.seed
    elif "PETVOTE_SEED" in os.environ:
        cfg.seed = os.environ["PETVOTE_SEED"]
    if args.mode:
        cfg.mode = args.mode
    try:
        cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    os.makedirs(args.dir, exist_ok=True)
    rng = Rng(cfg.seed)
    params = cfg.group_params()
    cfg.params_text = params.to_text()
    ctx = setup_election(
        params, cfg.k, cfg.l, cfg.m, cfg.mode, cfg.n_tellers, cfg.threshold,
        rng.child("setup"), election_id=f"election-{cfg.seed}",
    )
    board = Board()
    publish_setup(board, cfg, ctx)
    board.save(_path(args.dir, "board.log"))
    with open(_path(args.dir, "config.json"), "w") as fh:
        fh.write(cfg.to_json())
    save_context(args.dir, ctx, cfg)
    print(json.dumps({"status": "ok", "election_id": ctx.election_id, "dir": args.dir}))
    return 0


def cmd_register(args) -> int:
    ctx, cfg = load_context(args.dir)
    board = Board.load(_path(args.dir, "board.log"))
    rng = Rng(cfg.seed)
    ids = voter_ids(cfg.n_voters)
    out = run_codegen(
        ctx.params, ctx.options, ctx.codes, ctx.e_public, ctx.c_public,
        ctx.print_keys.pk, ctx.print_keys.sk, ids, cfg.n_tellers,
        rng.child("codegen"), lam=cfg.lam, with_proofs=not cfg.fast_tables,
        context=ctx.election_id.encode(),
    )
    publish_codegen(board, out.transcript)
    board.save(_path(args.dir, "board.log"))
    _save_json(_path(args.dir, "sheets.json"), [wire.sheet_to_wire(s) for s in out.sheets])
    if args.print_sheets:
        for sheet in out.sheets:
            print(render_sheet(sheet))
            print()
    print(json.dumps({"status": "ok", "voters": len(ids), "board_entries": len(board.entries)}))
    return 0


def cmd_cast(args) -> int:
    server, cfg, sheets = _load_server(args.dir)
    sheet_data = sheets.get(args.voter)
    if sheet_data is None:
        print(f"unknown voter {args.voter}", file=sys.stderr)
        return 2
    sheet = wire.sheet_from_wire(sheet_data)
    if args.auth is not None:
        sheet = replace(sheet, auth_code=args.auth)
    choices = [int(x) for x in args.choices.split(",")]
    cheat = None
    if args.cheat_flip:
        cheat = PlatformCheat(
            flip_options=tuple(int(x) for x in args.cheat_flip.split(",")),
            adjust_btilde=args.cheat_adjust,
        )
    rng = Rng(cfg.seed).child(f"cli-cast-{args.voter}")
    try:
        session, _ = cast_one(server.ctx, server, sheet, choices, rng, cheat)
    except Exception as exc:
        print(json.dumps({"status": "rejected", "reason": str(exc)}))
        return 1
    server.board.save(_path(args.dir, "board.log"))
    _save_sessions(args.dir, server)
    print(
        json.dumps(
            {
                "status": "ok",
                "voter": args.voter,
                "state": session.state,
                "return_codes": session.sent_codes,
                "alarm": session.alarm,
            }
        )
    )
    return 0 if session.state == CODES_SENT else 1


def cmd_finalize(args) -> int:
    server, cfg, _sheets = _load_server(args.dir)
    rng = Rng(cfg.seed).child(f"cli-finalize-{args.voter}")
    try:
        confirmation = server.finalize(args.voter, args.code, rng)
    except Exception as exc:
        print(json.dumps({"status": "rejected", "reason": str(exc)}))
        return 1
    server.board.save(_path(args.dir, "board.log"))
    _save_sessions(args.dir, server)
    print(json.dumps({"status": "ok", "voter": args.voter, "confirmation": confirmation}))
    return 0


def cmd_tally(args) -> int:
    from .protocol import tally as run_tally

    server, cfg, _sheets = _load_server(args.dir)
    rng = Rng(cfg.seed).child("cli-tally")
    result = run_tally(server.ctx, server.ballot_box, server.board, rng)
    server.board.save(_path(args.dir, "board.log"))
    print(
        json.dumps(
            {
                "status": "ok",
                "counts": result.counts,
                "ballots": result.total_ballots,
                "rejected": result.rejected,
            }
        )
    )
    return 0


def cmd_verify(args) -> int:
    if args.board is None and args.dir is None:
        print("verify needs --dir or --board", file=sys.stderr)
        return 2
    board_path = args.board or _path(args.dir, "board.log")
    if not verify_board_file(board_path):
        print(json.dumps({"status": "fail", "check": "board-chain"}))
        return 1
    board = Board.load(board_path)
    ok, checks = verify_election(board)
    for name, result in checks:
        print(f"{'PASS' if result else 'FAIL'} {name}")
    print(json.dumps({"status": "ok" if ok else "fail", "checks": len(checks)}))
    return 0 if ok else 1


def _experiment_config(args) -> ElectionConfig:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = ElectionConfig.from_json(fh.read())
    else:
        cfg = ElectionConfig(
            n_voters=args.voters,
            n_corrupt_voters=args.corrupt_voters,
            k=args.options,
            l=args.code_bits,
            m=args.code_space,
            n_tellers=args.tellers,
            threshold=args.threshold,
            bits=args.bits,
            seed=args.seed or os.environ.get("PETVOTE_SEED", "petvote"),
            lam=args.lam,
        )
    return cfg


def cmd_experiment(args) -> int:
    cfg = _experiment_config(args)
    try:
        if args.kind == "cai":
            report = experiment_cai(cfg, args.trials)
            print(report.to_json())
            return 0 if report.passed else 1
        report = experiment_privacy(cfg, args.trials)
        print(report.to_json_lines())
        print(json.dumps({"experiment": "privacy", "passed": report.passed,
                          "runtime_seconds": round(report.runtime_seconds, 3)}, sort_keys=True))
        return 0 if report.passed else 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


def cmd_attack_demo(args) -> int:
    result = run_attack_demo(seed=args.seed or "ot-attack")
    for key, value in result.items():
        print(f"{key}: {value}")
    print(json.dumps(result))
    return 0 if result["attack_succeeds"] and not result["countermeasure_accepts_malicious"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="petvote", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("setup", help="create an election directory")
    p.add_argument("--dir", required=True)
    p.add_argument("--config", help="config JSON file")
    p.add_argument("--voters", type=int)
    p.add_argument("--options", type=int, help="number of voting options k")
    p.add_argument("--code-bits", dest="code_bits", type=int)
    p.add_argument("--code-space", dest="code_space", type=int)
    p.add_argument("--mode", choices=["sparse", "dense"])
    p.add_argument("--tellers", type=int)
    p.add_argument("--threshold", type=int)
    p.add_argument("--bits", type=int)
    p.add_argument("--lam", type=int)
    p.add_argument("--seed")
    p.set_defaults(fn=cmd_setup)

    p = sub.add_parser("register", help="generate code tables and ballot sheets")
    p.add_argument("--dir", required=True)
    p.add_argument("--print-sheets", dest="print_sheets", action="store_true",
                   help="render the printable sheets to stdout")
    p.set_defaults(fn=cmd_register)

    p = sub.add_parser("cast", help="cast one voter's ballot")
    p.add_argument("--dir", required=True)
    p.add_argument("--voter", required=True)
    p.add_argument("--choices", required=True, help="comma separated 0/1 per option")
    p.add_argument("--auth", help="override the authentication code")
    p.add_argument("--cheat-flip", dest="cheat_flip", help="corrupted platform: flip these options")
    p.add_argument("--cheat-adjust", dest="cheat_adjust", action="store_true",
                   help="corrupted platform also adjusts the flipped-bit vector")
    p.set_defaults(fn=cmd_cast)

    p = sub.add_parser("finalize", help="finalize a session with the finalization code")
    p.add_argument("--dir", required=True)
    p.add_argument("--voter", required=True)
    p.add_argument("--code", required=True)
    p.set_defaults(fn=cmd_finalize)

    p = sub.add_parser("tally", help="threshold-decrypt the ballot box and count")
    p.add_argument("--dir", required=True)
    p.set_defaults(fn=cmd_tally)

    p = sub.add_parser("verify", help="re-verify a bulletin board end to end")
    p.add_argument("--dir", default=None)
    p.add_argument("--board", default=None, help="board file (defaults to DIR/board.log)")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("experiment", help="run a security experiment")
    p.add_argument("kind", choices=["cai", "privacy"])
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--config")
    p.add_argument("--voters", type=int, default=8)
    p.add_argument("--corrupt-voters", dest="corrupt_voters", type=int, default=2)
    p.add_argument("--options", type=int, default=1)
    p.add_argument("--code-bits", dest="code_bits", type=int, default=6)
    p.add_argument("--code-space", dest="code_space", type=int, default=64)
    p.add_argument("--tellers", type=int, default=3)
    p.add_argument("--threshold", type=int, default=2)
    p.add_argument("--bits", type=int, default=64)
    p.add_argument("--lam", type=int, default=16)
    p.add_argument("--seed")
    p.set_defaults(fn=cmd_experiment)

    p = sub.add_parser("attack-demo", help="reproduce the OT-scheme attack")
    p.add_argument("--seed")
    p.set_defaults(fn=cmd_attack_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())

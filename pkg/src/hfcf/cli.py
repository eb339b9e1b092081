"""Command-line interface: transform, metrics, protection, gallery, and the
secure distance service."""

from __future__ import annotations

import argparse
import json
import math
import os
import socket
import sys
import threading

from . import gallery, pipeline, privmetrics, tensorio
from .errors import ParamError, ToolkitError
from .fusion import FusionScheme, NoiseSpec
from .polyprotect import gen_params, params_to_record, protect
from .smpc import (
    SocketTransport,
    TripleStore,
    dealer_make_triples,
    query_gallery,
    serve_gallery,
)


def _parse_noise(text: str, seed: int) -> NoiseSpec:
    if text == "none":
        return NoiseSpec.none()
    kind, _, value = text.partition(":")
    if kind == "laplace" and value:
        return NoiseSpec.laplace(float(value), seed=seed)
    if kind == "gauss" and value:
        return NoiseSpec.gaussian(float(value), seed=seed)
    raise ParamError(f"noise must be none, laplace:EPS or gauss:SIGMA, got {text!r}")


def _parse_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    return int(lo), int(hi)


def _parse_endpoint(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise argparse.ArgumentTypeError(f"endpoint must be HOST:PORT, got {text!r}")
    return host, int(port)


def cmd_transform(args) -> int:
    config = pipeline.PipelineConfig(
        scheme=FusionScheme(args.scheme),
        noise=_parse_noise(args.noise, args.seed),
        upsample_factor=args.factor,
        alpha=args.alpha,
        seed=args.seed,
    )
    if args.manifest:
        outputs = pipeline.run_batch(args.manifest, config, suffix=args.suffix, workers=args.workers)
        for out in outputs:
            print(f"wrote {out}")
        return 0
    if not args.image or not args.out:
        print("error: IMAGE and OUT are required without --manifest", file=sys.stderr)
        return 2
    stages = pipeline.run_transform(args.image, config)
    tensorio.write_tensor(stages.noisy.tensor, args.out)
    with open(args.out + ".meta", "w", encoding="utf-8") as fh:
        fh.write(f"scheme={stages.noisy.scheme.value}\n")
        fh.write(f"noise={args.noise} seed={args.seed}\n")
        fh.write("freq_order=" + ",".join(map(str, stages.freq_perm.ordering)) + "\n")
        if stages.dlbp_perm is not None:
            fh.write("dlbp_order=" + ",".join(map(str, stages.dlbp_perm.ordering)) + "\n")
        labels = stages.noisy.tensor.labels or []
        fh.write("planes=" + ",".join(labels) + "\n")
    print(
        f"wrote {args.out}: {stages.noisy.tensor.height}x"
        f"{stages.noisy.tensor.width}x{stages.noisy.depth} ({args.scheme})"
    )
    return 0


def _metric_planes(path):
    """Yield (label, plane) pairs from an image or HFT1 tensor file."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
    name = os.path.basename(path)
    if magic == tensorio.TENSOR_MAGIC:
        t = tensorio.read_tensor(path)
        for k in range(t.depth):
            yield f"{name}[{k}]", privmetrics.minmax_normalize(t.plane(k))
    else:
        yield name, tensorio.luma(tensorio.load_image(path))


def cmd_metrics(args) -> int:
    ref = tensorio.luma(tensorio.load_image(args.ref))
    ref_label = os.path.basename(args.ref)
    reports = [
        privmetrics.compare(ref, plane, ref_label, label)
        for label, plane in _metric_planes(args.test)
    ]
    records = []
    for rep in reports:
        print(rep.line())
        records.append(
            {
                "ref": rep.ref_label,
                "test": rep.test_label,
                "psnr_db": None if math.isinf(rep.psnr_db) else rep.psnr_db,
                "psnr_infinite": math.isinf(rep.psnr_db),
                "ssim": rep.ssim,
            }
        )
    if args.records:
        with open(args.records, "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(rec) + "\n")
    return 0


def cmd_protect(args) -> int:
    vec = tensorio.read_embedding(args.embedding)
    params = gen_params(
        args.seed,
        m=args.m,
        e_range=_parse_range(args.e_range),
        c_range=_parse_range(args.c_range),
        overlap=args.overlap,
    )
    protected = protect(vec, params)
    tensorio.write_embedding(protected.values, args.out, raw=args.raw)
    print(
        f"protected {vec.size} -> {protected.values.size} values, "
        f"fingerprint {protected.params_fingerprint[:16]}"
    )
    return 0


def cmd_enroll(args) -> int:
    store = (
        gallery.GalleryStore.load(args.store)
        if os.path.exists(args.store)
        else gallery.GalleryStore()
    )
    vec = tensorio.read_embedding(args.embedding)
    record = store.enroll(args.identity, vec, args.seed, args.overlap)
    gallery.append_record(args.store, record)
    if args.params:
        params = gen_params(args.seed, overlap=args.overlap)
        with open(args.params, "a", encoding="utf-8") as fh:
            fh.write(f"{args.identity}\t{params_to_record(params)}\n")
    print(f"enrolled {args.identity!r} ({record.protected.size} values) into {args.store}")
    return 0


def cmd_query(args) -> int:
    vec = tensorio.read_embedding(args.embedding)
    params = gallery.params_file_read(args.params)
    if args.secure:
        host, port = _parse_endpoint(args.secure)
        labels = list(params)
        queries = [protect(vec, params[identity]).values for identity in labels]
        dim = queries[0].size
        client_triples, _ = dealer_make_triples(
            len(labels), dim, args.triple_seed, start_id=args.triple_start
        )
        sock = socket.create_connection((host, port), timeout=30)
        transport = SocketTransport(sock)
        try:
            pairs = query_gallery(transport, queries, labels, TripleStore(client_triples))
        finally:
            transport.close()
        pairs.sort(key=lambda item: item[1])
        pairs = pairs[: min(args.top, len(pairs))]
        result = gallery.QueryResult(tuple(pairs), args.truth)
    else:
        if not args.store:
            print("error: --store is required for local queries", file=sys.stderr)
            return 2
        store = gallery.GalleryStore.load(args.store)
        result = gallery.query_1n(vec, params, store, args.top, truth=args.truth)
    for rank, (identity, dist) in enumerate(result.ranked, start=1):
        marker = " *" if args.truth and identity == args.truth else ""
        print(f"{rank}\t{identity}\t{dist:.6f}{marker}")
    return 0


def cmd_smpc_serve(args) -> int:
    host, port = _parse_endpoint(args.endpoint)
    store = gallery.GalleryStore.load(args.store)
    shares = store.enrolled_shares()
    if not shares:
        print("store is empty", file=sys.stderr)
        return 1
    dim = shares[0].dim
    count = args.sessions * len(shares)
    _, server_triples = dealer_make_triples(count, dim, args.triple_seed)
    triples = TripleStore(server_triples)

    srv = socket.create_server((host, port))
    actual_port = srv.getsockname()[1]
    print(f"serving {len(shares)} enrolled identities on {host}:{actual_port}")
    sys.stdout.flush()
    try:
        if args.once:
            conn, _ = srv.accept()
            serve_gallery(SocketTransport(conn), shares, triples)
            return 0
        while True:
            conn, _ = srv.accept()
            t = threading.Thread(
                target=serve_gallery,
                args=(SocketTransport(conn), shares, triples),
                daemon=True,
            )
            t.start()
    except KeyboardInterrupt:
        return 0
    finally:
        srv.close()


def cmd_smpc_client(args) -> int:
    host, port = _parse_endpoint(args.endpoint)
    vec = tensorio.read_embedding(args.protected)
    with open(args.labels, "r", encoding="utf-8") as fh:
        labels = [line.strip() for line in fh if line.strip()]
    client_triples, _ = dealer_make_triples(
        len(labels), vec.size, args.triple_seed, start_id=args.triple_start
    )
    sock = socket.create_connection((host, port), timeout=30)
    transport = SocketTransport(sock)
    try:
        pairs = query_gallery(transport, vec, labels, TripleStore(client_triples))
    finally:
        transport.close()
    for identity, dist in sorted(pairs, key=lambda item: item[1]):
        print(f"{identity}\t{dist:.6f}")
    return 0


def cmd_selftest(args) -> int:
    from . import selftest

    return selftest.run()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hfcf",
        description="privacy-preserving face-template toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="image -> hybrid frequency-color tensor")
    p.add_argument("image", nargs="?")
    p.add_argument("out", nargs="?")
    p.add_argument(
        "--scheme",
        default="concat-dlbp",
        choices=[s.value for s in FusionScheme],
    )
    p.add_argument("--noise", default="none", help="none | laplace:EPS | gauss:SIGMA")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--factor", type=int, default=8)
    p.add_argument("--manifest", help="process every image path listed in this file")
    p.add_argument("--suffix", default=".hft", help="output suffix in manifest mode")
    p.add_argument("--workers", type=int, default=4, help="parallel images in manifest mode")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("metrics", help="PSNR/SSIM of a test file against a reference image")
    p.add_argument("ref", help="reference image (luma is used)")
    p.add_argument("test", help="image or HFT1 tensor")
    p.add_argument("--records", help="write machine-readable JSONL records here")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("protect", help="apply polynomial protection to an embedding")
    p.add_argument("embedding")
    p.add_argument("out")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--overlap", type=int, default=4)
    p.add_argument("--m", type=int, default=5)
    p.add_argument("--e-range", default="1:5")
    p.add_argument("--c-range", default="-100:100")
    p.add_argument("--raw", action="store_true", help="write raw prefixed float32")
    p.set_defaults(func=cmd_protect)

    p = sub.add_parser("enroll", help="protect an embedding and add it to a gallery store")
    p.add_argument("store")
    p.add_argument("identity")
    p.add_argument("embedding")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--overlap", type=int, default=4)
    p.add_argument("--params", help="append the identity's parameter record here")
    p.set_defaults(func=cmd_enroll)

    p = sub.add_parser("query", help="1:N identification of an embedding")
    p.add_argument("embedding")
    p.add_argument("--store", help="gallery store (local mode)")
    p.add_argument("--params", required=True, help="identity parameter file")
    p.add_argument("--top", type=int, default=5)
    p.add_argument("--truth", help="expected identity (marks the output)")
    p.add_argument("--secure", metavar="HOST:PORT", help="route through a distance server")
    p.add_argument("--triple-seed", type=int, default=0)
    p.add_argument("--triple-start", type=int, default=0)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("smpc-serve", help="serve secure distance sessions for a store")
    p.add_argument("endpoint", metavar="HOST:PORT")
    p.add_argument("--store", required=True)
    p.add_argument("--triple-seed", type=int, default=0)
    p.add_argument("--sessions", type=int, default=1, help="sessions worth of triples")
    p.add_argument("--once", action="store_true", help="serve one session and exit")
    p.set_defaults(func=cmd_smpc_serve)

    p = sub.add_parser("smpc-client", help="query a distance server with a protected vector")
    p.add_argument("endpoint", metavar="HOST:PORT")
    p.add_argument("--protected", required=True, help="protected embedding file")
    p.add_argument("--labels", required=True, help="identity per line, server order")
    p.add_argument("--triple-seed", type=int, default=0)
    p.add_argument("--triple-start", type=int, default=0)
    p.set_defaults(func=cmd_smpc_client)

    p = sub.add_parser("selftest", help="run built-in invariant checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

import json
import socket
import threading
import time

import numpy as np
import pytest

from hfcf import synth, tensorio
from hfcf.cli import main
from hfcf.gallery import GalleryStore, params_file_read
from hfcf.polyprotect import output_len


@pytest.fixture
def workdir(tmp_path, rng):
    tensorio.save_png(synth.make_face(5), tmp_path / "face.png")
    v = rng.uniform(-1, 1, size=64)
    v /= np.linalg.norm(v)
    tensorio.write_embedding(v, tmp_path / "emb.vec", raw=True)
    return tmp_path, v


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


class TestTransform:
    def test_writes_tensor_and_sidecar(self, workdir):
        base, _ = workdir
        out = base / "out.hft"
        rc = main(
            [
                "transform",
                str(base / "face.png"),
                str(out),
                "--scheme",
                "concat-dlbp",
                "--noise",
                "laplace:1.5",
                "--seed",
                "3",
            ]
        )
        assert rc == 0
        t = tensorio.read_tensor(out)
        assert t.depth == 126
        meta = (base / "out.hft.meta").read_text()
        assert "scheme=concat-dlbp" in meta
        assert "freq_order=" in meta
        assert "dlbp_order=" in meta

    def test_freq_scheme(self, workdir):
        base, _ = workdir
        out = base / "freq.hft"
        rc = main(["transform", str(base / "face.png"), str(out), "--scheme", "freq"])
        assert rc == 0
        assert tensorio.read_tensor(out).depth == 63

    def test_bad_noise_flag(self, workdir):
        base, _ = workdir
        rc = main(["transform", str(base / "face.png"), str(base / "x.hft"), "--noise", "what"])
        assert rc == 1

    def test_missing_image(self, tmp_path):
        rc = main(["transform", str(tmp_path / "nope.png"), str(tmp_path / "o.hft")])
        assert rc == 1

    def test_manifest_mode(self, tmp_path):
        for i in range(2):
            tensorio.save_png(synth.make_face(i), tmp_path / f"f{i}.png")
        manifest = tmp_path / "list.txt"
        manifest.write_text(f"{tmp_path}/f0.png\n{tmp_path}/f1.png\n")
        rc = main(["transform", "--manifest", str(manifest), "--scheme", "freq", "--suffix", ".t"])
        assert rc == 0
        for i in range(2):
            assert tensorio.read_tensor(tmp_path / f"f{i}.png.t").depth == 63

    def test_transform_needs_paths_without_manifest(self):
        assert main(["transform", "--scheme", "freq"]) == 2

    def test_sidecar_plane_labels(self, workdir):
        base, _ = workdir
        main(["transform", str(base / "face.png"), str(base / "s.hft"), "--scheme", "concat-lbp"])
        meta = (base / "s.hft.meta").read_text()
        plane_line = [l for l in meta.splitlines() if l.startswith("planes=")][0]
        assert len(plane_line.split(",")) == 66
        assert "lbp:R" in plane_line


class TestMetrics:
    def test_image_vs_tensor_records(self, workdir):
        base, _ = workdir
        main(["transform", str(base / "face.png"), str(base / "t.hft"), "--scheme", "freq"])
        records = base / "m.jsonl"
        rc = main(
            ["metrics", str(base / "face.png"), str(base / "t.hft"), "--records", str(records)]
        )
        assert rc == 0
        lines = [json.loads(line) for line in records.read_text().splitlines()]
        assert len(lines) == 63
        assert all("ssim" in rec and "psnr_db" in rec for rec in lines)

    def test_self_comparison(self, workdir, capsys):
        base, _ = workdir
        rc = main(["metrics", str(base / "face.png"), str(base / "face.png")])
        assert rc == 0
        out = capsys.readouterr().out
        assert "psnr_db=inf" in out
        assert "ssim=1.00000" in out


class TestProtect:
    def test_output_length_matches(self, workdir):
        base, v = workdir
        out = base / "prot.vec"
        rc = main(
            ["protect", str(base / "emb.vec"), str(out), "--seed", "9", "--overlap", "2"]
        )
        assert rc == 0
        got = tensorio.read_embedding(out)
        assert got.size == output_len(64, 5, 2)


def setup_gallery(base, count=6, dim=64):
    ids = synth.make_identities(count, dim, seed=77)
    for i in range(count):
        tensorio.write_embedding(ids[i], base / f"id{i}.vec", raw=True)
        rc = main(
            [
                "enroll",
                str(base / "store.tsv"),
                f"id{i}",
                str(base / f"id{i}.vec"),
                "--seed",
                str(800 + i),
                "--params",
                str(base / "params.tsv"),
            ]
        )
        assert rc == 0
    return ids


class TestEnrollQuery:
    def test_enroll_builds_store_and_params(self, tmp_path):
        ids = setup_gallery(tmp_path)
        store = GalleryStore.load(tmp_path / "store.tsv")
        assert len(store) == 6
        params = params_file_read(tmp_path / "params.tsv")
        assert list(params) == [f"id{i}" for i in range(6)]

    def test_duplicate_enroll_fails(self, tmp_path):
        setup_gallery(tmp_path, count=2)
        rc = main(
            [
                "enroll",
                str(tmp_path / "store.tsv"),
                "id0",
                str(tmp_path / "id0.vec"),
                "--seed",
                "1",
            ]
        )
        assert rc == 1

    def test_local_query_rank_one(self, tmp_path, capsys, rng):
        ids = setup_gallery(tmp_path)
        capsys.readouterr()  # drop enroll output
        q = synth.perturb(ids[3], 0.05, rng)
        tensorio.write_embedding(q, tmp_path / "q.vec", raw=True)
        rc = main(
            [
                "query",
                str(tmp_path / "q.vec"),
                "--store",
                str(tmp_path / "store.tsv"),
                "--params",
                str(tmp_path / "params.tsv"),
                "--top",
                "3",
                "--truth",
                "id3",
            ]
        )
        assert rc == 0
        first = capsys.readouterr().out.splitlines()[0].split("\t")
        assert first[0] == "1" and first[1] == "id3"

    def test_query_requires_store_or_secure(self, tmp_path):
        setup_gallery(tmp_path, count=2)
        rc = main(
            ["query", str(tmp_path / "id0.vec"), "--params", str(tmp_path / "params.tsv")]
        )
        assert rc == 2


class TestSecureCli:
    def test_serve_and_query_over_tcp(self, tmp_path, capsys, rng):
        ids = setup_gallery(tmp_path)
        q = synth.perturb(ids[2], 0.05, rng)
        tensorio.write_embedding(q, tmp_path / "q.vec", raw=True)
        port = free_port()

        server = threading.Thread(
            target=main,
            args=(
                [
                    "smpc-serve",
                    f"127.0.0.1:{port}",
                    "--store",
                    str(tmp_path / "store.tsv"),
                    "--triple-seed",
                    "21",
                    "--once",
                ],
            ),
            daemon=True,
        )
        server.start()
        time.sleep(0.4)
        capsys.readouterr()  # drop enroll/serve chatter
        rc = main(
            [
                "query",
                str(tmp_path / "q.vec"),
                "--params",
                str(tmp_path / "params.tsv"),
                "--secure",
                f"127.0.0.1:{port}",
                "--triple-seed",
                "21",
                "--top",
                "2",
                "--truth",
                "id2",
            ]
        )
        server.join(timeout=10)
        assert rc == 0
        out = capsys.readouterr().out
        lines = [l for l in out.splitlines() if "\t" in l]
        assert lines[0].split("\t")[1] == "id2"

    def test_smpc_client_with_protected_vector(self, tmp_path, capsys, rng):
        # enroll three identities under the SAME parameters so one protected
        # query is comparable across the gallery
        ids = synth.make_identities(3, 64, seed=5)
        for i in range(3):
            tensorio.write_embedding(ids[i], tmp_path / f"id{i}.vec", raw=True)
            main(
                [
                    "enroll",
                    str(tmp_path / "store.tsv"),
                    f"id{i}",
                    str(tmp_path / f"id{i}.vec"),
                    "--seed",
                    "42",
                    "--overlap",
                    "4",
                ]
            )
        (tmp_path / "labels.txt").write_text("id0\nid1\nid2\n")
        q = synth.perturb(ids[1], 0.02, rng)
        tensorio.write_embedding(q, tmp_path / "q.vec", raw=True)
        main(
            [
                "protect",
                str(tmp_path / "q.vec"),
                str(tmp_path / "qp.vec"),
                "--seed",
                "42",
                "--overlap",
                "4",
            ]
        )
        port = free_port()
        server = threading.Thread(
            target=main,
            args=(
                [
                    "smpc-serve",
                    f"127.0.0.1:{port}",
                    "--store",
                    str(tmp_path / "store.tsv"),
                    "--triple-seed",
                    "33",
                    "--once",
                ],
            ),
            daemon=True,
        )
        server.start()
        time.sleep(0.4)
        rc = main(
            [
                "smpc-client",
                f"127.0.0.1:{port}",
                "--protected",
                str(tmp_path / "qp.vec"),
                "--labels",
                str(tmp_path / "labels.txt"),
                "--triple-seed",
                "33",
            ]
        )
        server.join(timeout=10)
        assert rc == 0
        out = [
            l
            for l in capsys.readouterr().out.splitlines()
            if "\t" in l and not l.startswith("serving")
        ]
        assert out[0].split("\t")[0] == "id1"


def test_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 6
    assert "FAIL" not in out

"""Service launcher: ``scorer-service --backend stub --port 8731 --stub-seed 7``."""

from __future__ import annotations

import argparse
from dataclasses import dataclass

import uvicorn

from .app import create_app
from .stub import StubBackend, StubConfig, load_banks


@dataclass
class BackendConfig:
    backend: str = "stub"
    stub_seed: int = 0
    model_id: str | None = None
    classifier_id: str | None = None
    device: str = "cpu"
    port: int = 8731

    def __post_init__(self) -> None:
        if self.backend not in ("stub", "transformer"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.backend == "transformer" and not (self.model_id and self.classifier_id):
            raise ValueError("transformer backend requires --model-id and --classifier-id")


def build_backend(cfg: BackendConfig, banks_path: str | None = None,
                  noise: float = 0.0, eos_after: int = 4):
    if cfg.backend == "stub":
        stub_cfg = StubConfig(seed=cfg.stub_seed, noise=noise, eos_after=eos_after)
        if banks_path:
            stub_cfg.banks = load_banks(banks_path)
        return StubBackend(stub_cfg)
    from .transformer import TransformerBackend

    return TransformerBackend(cfg.model_id, cfg.classifier_id, cfg.device)


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(prog="scorer-service")
    parser.add_argument("--backend", choices=("stub", "transformer"), default="stub")
    parser.add_argument("--port", type=int, default=8731)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--stub-seed", type=int, default=0)
    parser.add_argument("--banks", default=None, help="sentence-bank JSON fixture")
    parser.add_argument("--noise", type=float, default=0.0)
    parser.add_argument("--eos-after", type=int, default=4)
    parser.add_argument("--model-id", default=None, help='e.g. "allenai/led-base-16384"')
    parser.add_argument("--classifier-id", default=None)
    parser.add_argument("--device", default="cpu")
    args = parser.parse_args(argv)

    cfg = BackendConfig(
        backend=args.backend,
        stub_seed=args.stub_seed,
        model_id=args.model_id,
        classifier_id=args.classifier_id,
        device=args.device,
        port=args.port,
    )
    backend = build_backend(cfg, args.banks, args.noise, args.eos_after)
    uvicorn.run(create_app(backend), host=args.host, port=cfg.port, log_level="warning")


if __name__ == "__main__":
    main()

"""Run the embedding service: ``python -m embed_service [--port N]``."""

import argparse

import uvicorn

from .app import create_app
from .config import ServiceConfig


def main() -> None:
    parser = argparse.ArgumentParser(prog="embed-service")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=None)
    parser.add_argument("--model", default=None)
    parser.add_argument("--revision", default=None)
    parser.add_argument("--dim", type=int, default=None)
    parser.add_argument("--max-batch-size", type=int, default=None)
    parser.add_argument("--no-normalize", action="store_true")
    args = parser.parse_args()

    config = ServiceConfig()
    from dataclasses import replace

    updates = {}
    if args.port is not None:
        updates["port"] = args.port
    if args.model:
        updates["model_name"] = args.model
    if args.revision:
        updates["revision"] = args.revision
    if args.dim:
        updates["dim"] = args.dim
    if args.max_batch_size:
        updates["max_batch_size"] = args.max_batch_size
    if args.no_normalize:
        updates["normalize"] = False
    if updates:
        config = replace(config, **updates)

    uvicorn.run(create_app(config), host=args.host, port=config.port)


if __name__ == "__main__":
    main()

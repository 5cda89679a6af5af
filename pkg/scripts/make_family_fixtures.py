"""Rewrite the shipped family datasets from the builders in emdm.demo.familytree."""
from pathlib import Path

from emdm.demo.familytree import fixture_files

DATA = Path(__file__).resolve().parents[1] / "src" / "emdm" / "demo" / "data"


def main() -> None:
    for name, text in fixture_files().items():
        path = DATA / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        print(f"wrote {path.relative_to(DATA.parents[3])}")


if __name__ == "__main__":
    main()

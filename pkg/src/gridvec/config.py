"""Run configuration: INI-style file plus flag overrides."""

import configparser
import dataclasses
from dataclasses import dataclass, field


class ConfigError(ValueError):
    pass


@dataclass
class KeypointConfig:
    target: int = 250
    threshold: float = 20 / 255
    arc: int = 9
    margin: int = -1            # -1: half the patch side
    moment_radius: int = 3


@dataclass
class ImageConfig:
    width: int = 0              # 0 keeps the source size
    height: int = 0


@dataclass
class GridConfig:
    rows: int = 5
    cols: int = 5
    diagonal: bool = False


@dataclass
class PatchConfig:
    side: int = 32


@dataclass
class ExtractorConfig:
    kind: str = "color_histogram"   # color_histogram | hog | fgv1
    bins: int = 8
    cell: int = 8
    orientations: int = 9
    import_dir: str = ""            # per-image <stem>.fgv1 files when kind = fgv1


@dataclass
class EmbedConfig:
    variant: str = "Agg1R"
    gamma: float = 1.0
    theta: str = "neighbors"        # "neighbors" or a positive constant
    edge_weighting: str = "none"


@dataclass
class TrainConfig:
    hidden: int = 128
    epochs: int = 100
    lr: float = 1e-3
    batch: int = 32
    momentum: float = 0.9


@dataclass
class RunConfig:
    seed: int = 0
    workers: int = 1


@dataclass
class Config:
    keypoints: KeypointConfig = field(default_factory=KeypointConfig)
    image: ImageConfig = field(default_factory=ImageConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    patch: PatchConfig = field(default_factory=PatchConfig)
    extractor: ExtractorConfig = field(default_factory=ExtractorConfig)
    embed: EmbedConfig = field(default_factory=EmbedConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    run: RunConfig = field(default_factory=RunConfig)

    @property
    def margin(self) -> int:
        m = self.keypoints.margin
        return self.patch.side // 2 if m < 0 else m

    def embed_params(self):
        from gridvec.embed import EmbedParams
        theta = None if self.embed.theta == "neighbors" else float(self.embed.theta)
        return EmbedParams(self.embed.variant, self.embed.gamma, theta, self.embed.edge_weighting)

    def extractor_params(self) -> dict:
        if self.extractor.kind == "color_histogram":
            return {"bins": self.extractor.bins}
        if self.extractor.kind == "hog":
            return {"cell": self.extractor.cell, "orientations": self.extractor.orientations}
        return {}

    def validate(self):
        k = self.keypoints
        if k.target < 1 or not 0 < k.threshold < 1 or not 1 <= k.arc <= 16:
            raise ConfigError("keypoints: target >= 1, 0 < threshold < 1, 1 <= arc <= 16")
        if self.grid.rows < 1 or self.grid.cols < 1 or self.patch.side < 1:
            raise ConfigError("grid rows/cols and patch side must be >= 1")
        if self.extractor.kind not in ("color_histogram", "hog", "fgv1"):
            raise ConfigError(f"extractor.kind: unknown extractor {self.extractor.kind!r}")
        if self.extractor.kind == "fgv1" and not self.extractor.import_dir:
            raise ConfigError("extractor.import_dir is required when kind = fgv1")
        if self.train.hidden < 1 or self.train.batch < 1 or self.train.epochs < 0:
            raise ConfigError("train: hidden >= 1, batch >= 1, epochs >= 0")
        try:
            self.embed_params()
        except ValueError as exc:
            raise ConfigError(f"embed: {exc}") from None
        return self


def iter_keys(cfg: Config = None):
    """Yield (section, key, type, value) for every config entry."""
    cfg = cfg or Config()
    for sec in dataclasses.fields(cfg):
        section = getattr(cfg, sec.name)
        for f in dataclasses.fields(section):
            yield sec.name, f.name, f.type, getattr(section, f.name)


def _coerce(raw: str, typ, where: str):
    raw = raw.strip()
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "\"'":
        raw = raw[1:-1]
    try:
        if typ in (bool, "bool"):
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ in (int, "int"):
            return int(raw)
        if typ in (float, "float"):
            return float(raw)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {getattr(typ, '__name__', typ)}") from None
    return raw


def set_value(cfg: Config, section: str, key: str, raw):
    if not hasattr(cfg, section) or not dataclasses.is_dataclass(getattr(cfg, section)):
        raise ConfigError(f"unknown config section [{section}]")
    sec = getattr(cfg, section)
    types = {f.name: f.type for f in dataclasses.fields(sec)}
    if key not in types:
        raise ConfigError(f"unknown config key {section}.{key}")
    value = _coerce(raw, types[key], f"{section}.{key}") if isinstance(raw, str) else raw
    setattr(sec, key, value)


def parse_config(text: str, cfg: Config = None) -> Config:
    """Apply ``[section]`` / ``key = value`` lines (``#`` comments) onto ``cfg``."""
    cfg = cfg or Config()
    parser = configparser.ConfigParser(comment_prefixes=("#",), inline_comment_prefixes=("#",),
                                       delimiters=("=",), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    for section in parser.sections():
        for key, raw in parser.items(section):
            set_value(cfg, section, key, raw)
    return cfg


def load_config(path) -> Config:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def dump_config(cfg: Config) -> str:
    lines = []
    current = None
    for section, key, _, value in iter_keys(cfg):
        if section != current:
            if current is not None:
                lines.append("")
            lines.append(f"[{section}]")
            current = section
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"

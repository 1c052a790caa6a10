"""
Command line interface for PyQuadMat
Parses arguments into a validated run configuration and dispatches the
generation, algebra and benchmark commands
"""

import argparse
import logging
import sys
from contextlib import nullcontext
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from core.adjoint import adjoint_extended, determinant, echelon_form, kernel_basis, rank
from core.crt import DEFAULT_PRIME_BITS, adjoint_via_crt
from core.domain import POLYNOMIALS, get_domain
from core.errors import AlgebraError, ExecutionError, InputError
from core.factorize import cholesky, invert_strassen, invert_triangular
from core.multiply import MultiplyConfig, multiply
from core.pivots import DETERMINANT_SIGN_CONVENTION
from core.quadmatrix import QuadMatrix
from engine.bench import scaling_series, write_csv
from engine.scheduler import TaskEngine, WorkerTopology
from matrixio.matrix_market import encode_matrix_market, read_matrix_market
from matrixio.poly_format import encode_poly_matrix, read_poly_matrix
from utils.generators import DEFAULT_BIT_WIDTH, RandomSpec, generate_matrix
from utils.settings import SettingsManager, worker_override
from utils.text_utils import format_element, format_vector, parse_worker_counts

logger = logging.getLogger(__name__)

COMMANDS = ("gen", "multiply", "inverse", "tri-inverse", "cholesky", "adjoint",
            "kernel", "det", "rank", "echelon", "bench")
FIELD_ONLY = ("inverse", "tri-inverse", "cholesky")
BENCH_OPS = ("multiply", "inverse", "tri-inverse", "cholesky", "adjoint", "det", "rank")

EXIT_OK = 0
EXIT_ALGEBRA = 1
EXIT_INPUT = 2


class RunConfig(BaseModel):
    """Validated parameters of one CLI invocation"""

    model_config = ConfigDict(frozen=True)

    command: Literal[COMMANDS]
    inputs: List[str] = Field(default_factory=list)
    output: Optional[str] = None
    domain: Literal["int", "poly", "rational", "float64"] = "int"
    leaf_order: int = Field(32, ge=1)
    strassen_min_order: int = Field(128, ge=1)
    density_boundary: float = Field(0.3, gt=0, le=1)
    algorithm: Literal["standard", "strassen", "auto"] = "auto"
    crt: Literal["on", "off", "auto"] = "off"
    prime_bits: int = Field(DEFAULT_PRIME_BITS, ge=16, le=62)
    workers: List[int] = Field(default_factory=lambda: [1])
    topology: Literal["shared_queue", "multidispatch"] = "multidispatch"
    granularity: int = Field(256, ge=1)
    seed: int = 0
    repetitions: int = Field(3, ge=3)
    side: Literal["lower", "upper"] = "lower"
    order: Optional[int] = Field(None, ge=1)
    density: float = Field(1.0, gt=0, le=1)
    bit_width: int = Field(DEFAULT_BIT_WIDTH, ge=1, le=62)
    symmetric: bool = False
    spd: bool = False
    op: Literal[BENCH_OPS] = "adjoint"

    @model_validator(mode="after")
    def _reject_conflicts(self):
        if self.crt == "on" and self.domain != "int":
            raise ValueError(f"--crt on needs the int domain, got {self.domain}")
        if self.domain == "poly" and (self.command in FIELD_ONLY
                                      or (self.command == "bench" and self.op in FIELD_ONLY)):
            raise ValueError(f"{self.command} is not available over the poly domain")
        needed = 2 if self.command == "multiply" else 0 if self.command in ("gen", "bench") else 1
        if len(self.inputs) != needed:
            raise ValueError(f"{self.command} takes {needed} input file(s), got {len(self.inputs)}")
        if self.command in ("gen", "bench") and self.order is None:
            raise ValueError(f"{self.command} needs --order")
        return self

    def multiply_config(self):
        return MultiplyConfig(self.strassen_min_order, self.density_boundary, self.algorithm)

    def topology_for(self, workers):
        return WorkerTopology(workers, self.topology, self.granularity)

    def random_spec(self):
        return RandomSpec(order=self.order, density=self.density, bit_width=self.bit_width,
                          symmetric=self.symmetric, spd=self.spd)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", help="output file (stdout when omitted)")
    common.add_argument("--domain", choices=("int", "poly", "rational", "float64"), default="int")
    common.add_argument("--leaf-order", type=int)
    common.add_argument("--strassen-min-order", type=int, default=128)
    common.add_argument("--density-boundary", type=float, default=0.3)
    common.add_argument("--algorithm", choices=("standard", "strassen", "auto"), default="auto")
    common.add_argument("--crt", choices=("on", "off", "auto"), default="off")
    common.add_argument("--prime-bits", type=int)
    common.add_argument("--workers", help="worker counts, e.g. 1,2,4")
    common.add_argument("--topology", choices=("shared_queue", "multidispatch"))
    common.add_argument("--granularity", type=int)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--repetitions", type=int)
    common.add_argument("--settings", help="JSON settings file")
    common.add_argument("--log-level", default="WARNING",
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"))

    parser = argparse.ArgumentParser(prog="pyquadmat", description="Exact block-recursive linear algebra.")
    commands = parser.add_subparsers(dest="command", required=True)

    def random_options(sub):
        sub.add_argument("--order", type=int, required=True)
        sub.add_argument("--density", type=float, default=1.0)
        sub.add_argument("--bit-width", type=int, default=DEFAULT_BIT_WIDTH)
        sub.add_argument("--symmetric", action="store_true")
        sub.add_argument("--spd", action="store_true")

    random_options(commands.add_parser("gen", parents=[common], help="generate a random matrix"))
    multiply_cmd = commands.add_parser("multiply", parents=[common], help="product of two matrices")
    multiply_cmd.add_argument("inputs", nargs=2)
    for name, text in (("inverse", "Strassen block inverse"), ("cholesky", "Cholesky factor H and H^-1"),
                       ("adjoint", "extended adjoint A"), ("kernel", "kernel basis"),
                       ("det", "determinant"), ("rank", "rank"), ("echelon", "echelon form S")):
        commands.add_parser(name, parents=[common], help=text).add_argument("inputs", nargs=1)
    tri = commands.add_parser("tri-inverse", parents=[common], help="triangular inverse")
    tri.add_argument("inputs", nargs=1)
    tri.add_argument("--side", choices=("lower", "upper"), default="lower")
    bench = commands.add_parser("bench", parents=[common], help="scaling series as CSV")
    random_options(bench)
    bench.add_argument("--op", choices=BENCH_OPS, default="adjoint")
    return parser


def build_config(args):
    """Merge parsed arguments with the JSON settings and the environment"""
    settings = SettingsManager(args.settings).load_settings()
    workers = parse_worker_counts(args.workers) if args.workers else None
    if args.command != "bench":
        override = worker_override()
        if override is not None:
            workers = [override]
        elif workers is None:
            workers = [1]
    values = {
        "command": args.command,
        "inputs": getattr(args, "inputs", []),
        "output": args.output,
        "domain": args.domain,
        "leaf_order": args.leaf_order or settings.leaf_order,
        "strassen_min_order": args.strassen_min_order,
        "density_boundary": args.density_boundary,
        "algorithm": args.algorithm,
        "crt": args.crt,
        "prime_bits": args.prime_bits or settings.prime_bits,
        "workers": workers or settings.worker_counts,
        "topology": args.topology or settings.topology_mode,
        "granularity": args.granularity or settings.granularity,
        "seed": args.seed,
        "repetitions": args.repetitions or settings.repetitions,
    }
    for name in ("side", "order", "density", "bit_width", "symmetric", "spd", "op"):
        if hasattr(args, name):
            values[name] = getattr(args, name)
    return RunConfig(**values)


class CommandRunner:
    """Executes one RunConfig, writing results to the output file or stdout"""

    def __init__(self, config, stdout=None):
        self.config = config
        self.stdout = stdout or sys.stdout
        self.domain = get_domain(config.domain)
        self.cfg = config.multiply_config()

    # I/O

    def read(self, path):
        if self.domain == POLYNOMIALS:
            return read_poly_matrix(path, self.config.leaf_order)
        return read_matrix_market(path, self.domain, self.config.leaf_order)

    def emit_text(self, text, path=None):
        path = path or self.config.output
        if path:
            with open(path, "w", encoding="utf-8") as f:
                f.write(text)
        else:
            self.stdout.write(text)

    def emit_matrix(self, m, path=None, comments=()):
        if m.domain == POLYNOMIALS:
            self.emit_text(encode_poly_matrix(m), path)
        else:
            self.emit_text(encode_matrix_market(m, comments), path)

    def say(self, line):
        self.stdout.write(f"{line}\n")

    def use_crt(self, m):
        if self.config.crt == "on":
            return True
        if self.config.crt == "auto":
            return m.domain.name == "int" and m.density() >= self.config.density_boundary
        return False

    # Commands

    def run(self):
        config = self.config
        engine = None
        if config.command != "bench" and config.command != "gen":
            engine = TaskEngine(config.topology_for(config.workers[-1]))
        with engine or nullcontext():
            handler = getattr(self, "cmd_" + config.command.replace("-", "_"))
            handler(engine)
        return EXIT_OK

    def cmd_gen(self, engine):
        m = generate_matrix(self.config.random_spec(), self.config.seed, self.domain, self.config.leaf_order)
        self.emit_matrix(m, comments=(f"seed {self.config.seed}",))

    def cmd_multiply(self, engine):
        a, b = (self.read(path) for path in self.config.inputs)
        self.emit_matrix(multiply(a, b, cfg=self.cfg, engine=engine))

    def cmd_inverse(self, engine):
        self.emit_matrix(invert_strassen(self.read(self.config.inputs[0]), self.cfg, engine))

    def cmd_tri_inverse(self, engine):
        m = self.read(self.config.inputs[0])
        self.emit_matrix(invert_triangular(m, self.config.side, self.cfg, engine))

    def cmd_cholesky(self, engine):
        result = cholesky(self.read(self.config.inputs[0]), self.cfg, engine)
        self.emit_matrix(result.H)
        if self.config.output:
            self.emit_matrix(result.Hinv, self.config.output + ".inv")

    def _adjoint(self, m, engine):
        if self.use_crt(m):
            return adjoint_via_crt(m, self.config.prime_bits, self.cfg, engine)
        return adjoint_extended(m, cfg=self.cfg, engine=engine)

    def cmd_adjoint(self, engine):
        m = self.read(self.config.inputs[0])
        result = self._adjoint(m, engine)
        logical_rank = result.rank - (result.A.order - m.rows)
        self.emit_matrix(result.A.crop(m.rows, m.cols),
                         comments=(f"d {result.d}", f"rank {logical_rank}"))

    def cmd_kernel(self, engine):
        m = self.read(self.config.inputs[0])
        vectors = kernel_basis(m, self.cfg, engine)
        if self.config.output:
            basis = QuadMatrix.from_triplets(
                m.domain, m.cols, max(1, len(vectors)),
                [(i, k, v) for k, vector in enumerate(vectors) for i, v in enumerate(vector)],
                m.leaf_order)
            self.emit_matrix(basis, comments=(f"kernel dimension {len(vectors)}",))
            return
        for vector in vectors:
            self.say(format_vector(m.domain, vector))

    def cmd_det(self, engine):
        m = self.read(self.config.inputs[0])
        if self.use_crt(m):
            result = adjoint_via_crt(m, self.config.prime_bits, self.cfg, engine)
            value = result.E.sign() * DETERMINANT_SIGN_CONVENTION * result.d if result.E.is_full_rank else 0
        else:
            value = determinant(m, self.cfg, engine)
        self.say(format_element(m.domain, value))

    def cmd_rank(self, engine):
        m = self.read(self.config.inputs[0])
        self.say(rank(m, self.cfg, engine))

    def cmd_echelon(self, engine):
        m = self.read(self.config.inputs[0])
        form = echelon_form(m, self.cfg, engine)
        logical_rank = form.E.rank - (form.S.order - m.rows)
        pivots = " ".join(f"{i + 1},{j + 1}" for i, j in form.E.pivots if i < m.rows and j < m.cols)
        self.emit_matrix(form.S.crop(m.rows, m.cols),
                         comments=(f"d {form.d}", f"rank {logical_rank}", f"pivots {pivots}"))

    def cmd_bench(self, engine):
        config = self.config
        spd = config.spd or config.op in FIELD_ONLY
        spec = RandomSpec(order=config.order, density=config.density, bit_width=config.bit_width,
                          symmetric=config.symmetric or spd, spd=spd)
        m = generate_matrix(spec, config.seed, self.domain, config.leaf_order)
        label = config.op
        if config.op == "adjoint":
            label = "adjoint:crt" if self.use_crt(m) else "adjoint:standard"
        if config.op == "tri-inverse":
            m = QuadMatrix.from_triplets(m.domain, m.rows, m.cols,
                                         [(i, j, v) for i, j, v in m.entries() if i >= j], m.leaf_order)
        run = self._bench_operation(config.op, m)
        records = scaling_series(label, run, config.workers, config.order, float(m.density()),
                                 self.domain.name, config.repetitions, config.topology, config.granularity)
        if config.output:
            with open(config.output, "w", encoding="utf-8", newline="") as f:
                write_csv(records, f)
        else:
            write_csv(records, self.stdout)

    def _bench_operation(self, op, m):
        cfg = self.cfg
        operations = {
            "multiply": lambda engine: multiply(m, m, cfg=cfg, engine=engine),
            "inverse": lambda engine: invert_strassen(m, cfg, engine),
            "tri-inverse": lambda engine: invert_triangular(m, "lower", cfg, engine),
            "cholesky": lambda engine: cholesky(m, cfg, engine),
            "adjoint": lambda engine: self._adjoint(m, engine),
            "det": lambda engine: determinant(m, cfg, engine),
            "rank": lambda engine: rank(m, cfg, engine),
        }
        return operations[op]


def run_command(config, stdout=None):
    """Execute a validated RunConfig; errors propagate to the caller"""
    return CommandRunner(config, stdout).run()


def _report(exc):
    if isinstance(exc, ValidationError):
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first["loc"])
        message = f"{where}: {first['msg']}" if where else first["msg"]
    else:
        message = str(exc)
    sys.stderr.write(f"{type(exc).__name__}: {message}\n")


def main(argv=None, stdout=None):
    """Run one command; returns the process exit status"""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = build_config(args)
        return run_command(config, stdout)
    except (AlgebraError, ExecutionError) as exc:
        _report(exc)
        return EXIT_ALGEBRA
    except (InputError, ValidationError, OSError) as exc:
        _report(exc)
        return EXIT_INPUT

#!/usr/bin/env python3
"""
qstoch CLI 工具

在 JSON 文件上生成POVM目录、计算表示、复合与张量、运行定律验证
"""

import argparse
import logging
import logging.config
import sys
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .exceptions import QStochException, ValidationError
from .povm_catalog import (
    POVM_KINDS, PovmFamily, QuasiPovm, build_povm, computational_basis_povm, povm_family,
)
from .quantum import apply_channel, born_probabilities
from .representation import (
    negativity, qstoch_compose, represent_channel, represent_measurement,
    represent_state, star_compose, state_qrep, tensor_qrep, to_qstoch, transition_matrix,
    extract_quasi_povm,
)
from .settings import configure_from_file, get_settings
from .utils import (
    channel_from_json, measurement_from_json, povm_from_json, povm_to_json,
    qrep_from_json, qrep_to_json, read_json, report_to_json, state_from_json, write_json,
)
from . import verify


logger = logging.getLogger(__name__)


def parse_dims(text: str) -> tuple:
    """'2,3,2' -> (2, 3, 2)"""
    try:
        dims = tuple(int(part) for part in text.split(','))
    except ValueError:
        raise argparse.ArgumentTypeError(f"维度应为逗号分隔的整数，得到 {text!r}")
    if any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError(f"维度必须为正整数，得到 {text!r}")
    return dims


def parse_weights(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(',')]
    except ValueError:
        raise argparse.ArgumentTypeError(f"权重应为逗号分隔的实数，得到 {text!r}")


def load_povm(path: str) -> QuasiPovm:
    return povm_from_json(read_json(path), path=f"{path}:$")


def load_family(paths: Optional[Sequence[str]], kind: str, seed: int) -> PovmFamily:
    """--povm 文件按维度登记，其余维度由 --family 生成"""
    members: Dict[int, QuasiPovm] = {}
    for path in paths or ():
        povm = load_povm(path)
        if povm.dim in members:
            raise ValidationError(f"维度 {povm.dim} 指定了多个POVM文件")
        members[povm.dim] = povm
    return povm_family(kind, seed, members)


def emit(obj, output: Optional[str]):
    write_json(obj, output)
    if output:
        logger.info(f"已写出 {output}")


def cmd_catalog(args) -> int:
    povm = build_povm(args.kind, args.dim, args.seed, args.weights)
    emit(povm_to_json(povm), args.output)
    return 0


def cmd_represent(args) -> int:
    if args.what == 'state':
        povm = load_povm(args.povm)
        rep = state_qrep(povm, state_from_json(read_json(args.state), path=f"{args.state}:$"))
        t = transition_matrix(povm)
    elif args.what == 'channel':
        in_povm = load_povm(args.in_povm)
        out_povm = load_povm(args.out_povm) if args.out_povm else in_povm
        rep = represent_channel(in_povm, out_povm, channel_from_json(read_json(args.channel), path=f"{args.channel}:$"))
        t = transition_matrix(out_povm if args.frame == 'left' else in_povm)
    else:
        povm = load_povm(args.povm)
        meas = measurement_from_json(read_json(args.measurement), path=f"{args.measurement}:$")
        rep = represent_measurement(povm, meas)
        if args.frame == 'left':
            t = transition_matrix(computational_basis_povm(meas.outcome_count))
        else:
            t = transition_matrix(povm)

    if args.frame != 'qstoch_t':
        if args.what == 'state' and args.frame == 'right':
            t = transition_matrix(build_povm('unit', 1))
        rep = to_qstoch(rep, t, args.frame)
    emit(qrep_to_json(rep), args.output)
    return 0


def cmd_compose(args) -> int:
    second = qrep_from_json(read_json(args.second), path=f"{args.second}:$")
    first = qrep_from_json(read_json(args.first), path=f"{args.first}:$")
    if args.povm:
        rep = star_compose(second, first, transition_matrix(load_povm(args.povm)))
    else:
        rep = qstoch_compose(second, first)
    emit(qrep_to_json(rep), args.output)
    return 0


def cmd_tensor(args) -> int:
    left = qrep_from_json(read_json(args.left), path=f"{args.left}:$")
    right = qrep_from_json(read_json(args.right), path=f"{args.right}:$")
    emit(qrep_to_json(tensor_qrep(left, right)), args.output)
    return 0


def cmd_measure(args) -> int:
    """Q(M) * Q(rho) 给出结果分布，并与 Born 规则对照"""
    povm = load_povm(args.povm)
    rho = state_from_json(read_json(args.state), path=f"{args.state}:$")
    meas = measurement_from_json(read_json(args.measurement), path=f"{args.measurement}:$")
    if args.channel:
        rho = apply_channel(channel_from_json(read_json(args.channel), path=f"{args.channel}:$"), rho)

    outcome = star_compose(represent_measurement(povm, meas), state_qrep(povm, rho), transition_matrix(povm))
    probabilities = outcome.matrix[:, 0]
    born = born_probabilities(meas, rho)
    result = {
        'probabilities': [float(p) for p in probabilities],
        'born': [float(p) for p in born],
        'max_residual': float(np.max(np.abs(probabilities - born))),
    }
    emit(result, args.output)
    return 0


def cmd_negativity(args) -> int:
    data = read_json(args.file)
    if isinstance(data, dict) and 'effects' in data:
        t = transition_matrix(povm_from_json(data, path=f"{args.file}:$"))
        result = {
            'transition': negativity(t.matrix),
            'inverse': negativity(t.inverse),
            'sic_form': list(t.sic_form) if t.sic_form else None,
        }
    else:
        rep = qrep_from_json(data, path=f"{args.file}:$")
        if args.povm and rep.frame == 'qstoch_t':
            rep = to_qstoch(rep, transition_matrix(load_povm(args.povm)), 'right')
        result = {'negativity': negativity(rep.matrix), 'frame': rep.frame}

    if args.json:
        emit(result, args.output)
    else:
        for key, value in result.items():
            print(f"{key}: {value}")
    return 0


def cmd_extract(args) -> int:
    """从态映射 rho -> Q(Phi(rho)) 或常数映射中提取关联拟POVM"""
    if args.weights is not None:
        weights = np.array(args.weights)
        state_map: Callable = lambda rho: weights
    else:
        if not args.povm:
            raise ValidationError("extract 需要 --povm 或 --weights")
        povm = load_povm(args.povm)
        channel = channel_from_json(read_json(args.channel), path=f"{args.channel}:$") if args.channel else None
        if channel is not None and channel.dim_out != povm.dim:
            raise ValidationError(f"信道输出维度 {channel.dim_out} 与POVM维度 {povm.dim} 不符")

        def state_map(rho):
            return represent_state(povm, apply_channel(channel, rho) if channel else rho)

    extracted = extract_quasi_povm(args.dim, state_map, seed=args.seed)
    emit(povm_to_json(extracted), args.output)
    return 0


def run_verify(args) -> int:
    settings = get_settings()
    seed = settings.DEFAULT_SEED if args.seed is None else args.seed
    family = load_family(args.povm, args.family, args.family_seed)
    options = {'seed': seed}
    if args.tol is not None:
        options['tol'] = args.tol

    law = args.law
    if law == 'dichotomy':
        dim = args.dims[0] if args.dims else 2
        report = verify.dichotomy_report(family(dim))
        payload = report.to_dict()
        if args.json or args.output:
            emit(payload, args.output)
        if not args.json:
            print(f"dichotomy({dim}): {report.verdict.value} (gram_rank={report.gram_rank})")
        return 1 if report.verdict is verify.Verdict.VIOLATES_PREMISES else 0

    if law == 'convexity':
        report = verify.check_convexity(family, args.dims or (2, 2), **options)
    else:
        options['trials'] = args.trials
        options['workers'] = args.workers
        if law == 'functoriality':
            report = verify.check_functoriality(family, args.dims or (2, 2, 2), **options)
        elif law == 'monoidal':
            report = verify.check_monoidal(family, args.dims or (2, 2), **options)
        elif law == 'naturality':
            family_b = load_family(args.povm_b, args.family_b, args.family_seed)
            report = verify.check_naturality(family, family_b, args.dims or (2, 2), **options)
        elif law == 'dagger':
            report = verify.check_dagger(family, (args.dims or (2,))[0], **options)
        elif law == 'commutant':
            report = verify.check_commutant(transition_matrix(family((args.dims or (2,))[0])), **options)
        else:
            report = verify.check_faithfulness(family, (args.dims or (2,))[0], **options)

    if args.json or args.output:
        emit(report_to_json(report), args.output)
    if not args.json:
        status = "PASS" if report.passed else "FAIL"
        print(f"{report.law}: {status} max_residual={report.max_residual:.3e} tol={report.tolerance:.0e}")
    return 0 if report.passed else 1


def cmd_version(args) -> int:
    print(f"qstoch {__version__}")
    print("量子理论的拟随机表示：极小IC-POVM、函子 Q 与定律验证")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='qstoch',
        description='量子理论拟随机表示 CLI 工具'
    )
    parser.add_argument('--version', action='version', version=f'qstoch {__version__}')
    parser.add_argument('--json', action='store_true', help='输出机器可读的 JSON')
    parser.add_argument('--verbose', '-v', action='store_true', help='输出 DEBUG 日志')
    parser.add_argument('--config', help='配置文件 (.py/.json/.yaml)')

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument('-o', '--output', help='输出文件，缺省写到标准输出')

    subparsers = parser.add_subparsers(dest='command', help='可用命令')

    catalog = subparsers.add_parser('catalog', parents=[output], help='生成POVM文件')
    catalog.add_argument('--kind', choices=POVM_KINDS, default='sic')
    catalog.add_argument('--dim', type=int, default=2)
    catalog.add_argument('--seed', type=int, default=None)
    catalog.add_argument('--weights', type=parse_weights, default=None, help='trivial 族的权重')
    catalog.set_defaults(handler=cmd_catalog)

    represent = subparsers.add_parser('represent', help='计算 Q(state/channel/measurement)')
    represent.add_argument('--frame', choices=('qstoch_t', 'right', 'left'), default='qstoch_t')
    targets = represent.add_subparsers(dest='what', required=True)
    rep_state = targets.add_parser('state', parents=[output])
    rep_state.add_argument('--povm', required=True)
    rep_state.add_argument('--state', required=True)
    rep_channel = targets.add_parser('channel', parents=[output])
    rep_channel.add_argument('--in', dest='in_povm', required=True)
    rep_channel.add_argument('--out', dest='out_povm')
    rep_channel.add_argument('--channel', required=True)
    rep_measurement = targets.add_parser('measurement', parents=[output])
    rep_measurement.add_argument('--povm', required=True)
    rep_measurement.add_argument('--measurement', required=True)
    represent.set_defaults(handler=cmd_represent)

    compose = subparsers.add_parser('compose', parents=[output], help='复合两个表示：--povm 给出星复合，否则为普通矩阵乘法')
    compose.add_argument('second')
    compose.add_argument('first')
    compose.add_argument('--povm')
    compose.set_defaults(handler=cmd_compose)

    tensor = subparsers.add_parser('tensor', parents=[output], help='表示的张量积')
    tensor.add_argument('left')
    tensor.add_argument('right')
    tensor.set_defaults(handler=cmd_tensor)

    measure = subparsers.add_parser('measure', parents=[output], help='用表示计算测量结果分布')
    measure.add_argument('--povm', required=True)
    measure.add_argument('--state', required=True)
    measure.add_argument('--measurement', required=True)
    measure.add_argument('--channel')
    measure.set_defaults(handler=cmd_measure)

    neg = subparsers.add_parser('negativity', parents=[output], help='负性报告')
    neg.add_argument('file')
    neg.add_argument('--povm', help='把 QStoch_T 表示换到 QStoch 后再计算')
    neg.set_defaults(handler=cmd_negativity)

    extract = subparsers.add_parser('extract', parents=[output], help='从态映射提取关联拟POVM')
    extract.add_argument('--dim', type=int, required=True)
    extract.add_argument('--povm')
    extract.add_argument('--channel')
    extract.add_argument('--weights', type=parse_weights, default=None)
    extract.add_argument('--seed', type=int, default=0)
    extract.set_defaults(handler=cmd_extract)

    verify_parser = subparsers.add_parser('verify', parents=[output], help='运行定律验证')
    verify_parser.add_argument('law', choices=(
        'functoriality', 'monoidal', 'naturality', 'dagger',
        'commutant', 'faithfulness', 'convexity', 'dichotomy',
    ))
    verify_parser.add_argument('--povm', action='append', help='族成员文件（可重复）')
    verify_parser.add_argument('--family', choices=('sic', 'random'), default='sic')
    verify_parser.add_argument('--povm-b', action='append', help='naturality 的第二个族')
    verify_parser.add_argument('--family-b', choices=('sic', 'random'), default='random')
    verify_parser.add_argument('--family-seed', type=int, default=0)
    verify_parser.add_argument('--dims', type=parse_dims, default=None)
    verify_parser.add_argument('--trials', type=int, default=50)
    verify_parser.add_argument('--seed', type=int, default=None)
    verify_parser.add_argument('--tol', type=float, default=None)
    verify_parser.add_argument('--workers', type=int, default=None)
    verify_parser.set_defaults(handler=run_verify)

    version = subparsers.add_parser('version', help='显示版本信息')
    version.set_defaults(handler=cmd_version)

    return parser


def setup_logging(verbose: bool):
    settings = get_settings()
    logging.config.dictConfig(settings.LOGGING)
    if verbose or settings.DEBUG:
        logging.getLogger('qstoch').setLevel(logging.DEBUG)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """CLI主入口函数，返回退出码"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    if args.config:
        try:
            configure_from_file(args.config)
        except (OSError, ValueError, ImportError) as e:
            print(f"错误: 配置文件 {args.config} 加载失败: {e}", file=sys.stderr)
            return 2

    try:
        setup_logging(args.verbose)

        handler = getattr(args, 'handler', None)
        if handler is None:
            parser.print_help()
            return 0
        return handler(args)
    except QStochException as e:
        logger.debug("命令失败", exc_info=True)
        print(f"错误: {e.message}", file=sys.stderr)
        return e.exit_code


if __name__ == '__main__':
    sys.exit(main())

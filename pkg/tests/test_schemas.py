import io
from datetime import datetime, timedelta, timezone

from marshmallow import ValidationError

from .base import BaseTestCase
from src.cachenet.config import TestingConfig
from src.cachenet.exceptions import CsvFormatError
from src.cachenet.network_logic.comparison import compare_records, plot_series
from src.cachenet.network_logic.theory import CurvePoint, TheoryParams, TradeoffCurve
from src.cachenet.schemas import (
    RunManifest, RunManifestSchema, SimulationRequestSchema, TheoryRequestSchema, normalize_keys,
)
from src.cachenet.utils.config_manager import (
    load_simulation_plan, load_theory_request, merge_settings, read_config_file,
)
from src.cachenet.utils.csv_io import (
    ORACLE_COLUMNS, SUMMARY_COLUMNS, THEORY_COLUMNS, CurveRecord, curve_rows, format_rows, pick_source,
    read_curve_records, read_rows, write_rows,
)
from src.cachenet.utils.svg_plot import render_tradeoff_svg


class RequestSchemaTestCase(BaseTestCase):
    def test_key_spellings(self):
        self.assertEqual(normalize_keys({'gamma-r': 0.5, 'K': 4, 'C': 2.0, 'G_C': (4, 16), 'delta': None}),
                         {'gamma_r': 0.5, 'k_override': 4, 'link_rate': 2.0, 'g_c': [4, 16]})

    def test_comma_lists_and_defaults(self):
        data = SimulationRequestSchema().load({'n': '16', 'm': '3', 'gamma-r': '0.2, 0.6', 'g_c': '4,16',
                                               'seed': '0'})
        self.assertEqual(data['gamma_r'], [0.2, 0.6])
        self.assertEqual(data['g_c'], [4, 16])
        self.assertEqual(data['caching'], 'optimal')
        self.assertEqual(data['trials'], 100)
        self.assertFalse(data['allow_self_hit'])

    def test_bad_caching_kind(self):
        with self.assertRaises(ValidationError) as ctx:
            SimulationRequestSchema().load({'n': 16, 'm': 3, 'gamma_r': [0.5], 'g_c': [4], 'seed': 0,
                                            'caching': 'lru'})
        self.assertIn('caching', ctx.exception.messages)

    def test_theory_grid_absent_or_empty(self):
        base = {'n': 100, 'm': 10, 'gamma_r': '0.5'}
        self.assertNotIn('p_grid', TheoryRequestSchema().load(base))
        self.assertEqual(TheoryRequestSchema().load({**base, 'p_grid': ''})['p_grid'], [])
        self.assertEqual(TheoryRequestSchema().load(base)['sources'], ['achievable', 'outer', 'baselines'])
        with self.assertRaises(ValidationError):
            TheoryRequestSchema().load({**base, 'sources': 'achievable,lower'})


class ConfigManagerTestCase(BaseTestCase):
    def write_config(self, text):
        path = self.path('run.cfg')
        with open(path, 'w') as handle:
            handle.write(text)
        return path

    def test_file_values_and_bare_keys(self):
        path = self.write_config('# sweep\nn=64\nm=5\ngamma_r=0.4\ng-c=4,16,64\nseed=9\nverbose\n')
        self.assertEqual(read_config_file(path), {'n': '64', 'm': '5', 'gamma_r': '0.4', 'g-c': '4,16,64',
                                                  'seed': '9'})
        self.assertEqual(read_config_file(None), {})

    def test_flags_override_every_spelling(self):
        merged = merge_settings({'g-c': '4', 'seed': '1'}, {'g_c': (16,), 'seed': None, 'm': ()})
        self.assertEqual(merged, {'seed': '1', 'g_c': (16,)})

    def test_simulation_plan(self):
        path = self.write_config('n=64\nm=5\ngamma_r=0.4,0.6\ng_c=16,4\nseed=9\n')
        plan = load_simulation_plan(path, {'trials': 7, 'k_override': None}, TestingConfig)
        self.assertEqual(len(plan.bases), 2)
        self.assertEqual(plan.g_c_list, [16, 4])
        self.assertEqual([b.gamma_r for b in plan.bases], [0.4, 0.6])
        base = plan.bases[0]
        self.assertEqual((base.trials, base.delta, base.link_rate, base.workers, base.chunk_size),
                         (7, 0.4, 1.0, 1, 16))
        self.assertEqual(plan.validate(), [])

    def test_plan_rejects_shared_problems(self):
        with self.assertRaises(ValueError):
            load_simulation_plan(None, {'n': 50, 'm': 5, 'gamma_r': (0.5,), 'g_c': (4,), 'seed': 0}, TestingConfig)
        with self.assertRaises(ValidationError):
            load_simulation_plan(None, {'n': 64, 'm': 5, 'gamma_r': (0.5,), 'g_c': ('x',), 'seed': 0},
                                 TestingConfig)

    def test_theory_request(self):
        request = load_theory_request(None, {'n': 10000, 'm': 1000, 'gamma_r': (0.4, 0.6), 'delta': 1.0},
                                      TestingConfig)
        self.assertEqual([p.gamma_r for p in request.params], [0.4, 0.6])
        self.assertEqual(request.params[0].K, 16)
        self.assertIsNone(request.p_grid)
        request = load_theory_request(None, {'n': 100, 'm': 10, 'gamma_r': (0.5,), 'k_override': 4,
                                             'p_grid': '0.1,0.2'}, TestingConfig)
        self.assertEqual(request.params[0].K, 4)
        self.assertEqual(request.p_grid, [0.1, 0.2])


class CsvTestCase(BaseTestCase):
    def test_fixed_digits(self):
        text = format_rows(SUMMARY_COLUMNS, [{'gamma_r': 0.6, 'p': 1 / 3, 't_sim': 2.5e-3, 't_theory': 1e-20,
                                              'rel_error': 0.0}])
        self.assertEqual(text, 'gamma_r,p,t_sim,t_theory,rel_error\n0.6,0.333333333333,0.0025,1e-20,0\n')
        short = format_rows(SUMMARY_COLUMNS, [{'gamma_r': 0.6, 'p': 1 / 3, 't_sim': 1, 't_theory': 1,
                                               'rel_error': 0}], digits=4)
        self.assertIn('0.3333,', short)

    def test_oracle_rows(self):
        text = format_rows(ORACLE_COLUMNS, [{'suite': 'x', 'cases': 3, 'max_gap': 0.5, 'passed': False}])
        self.assertEqual(text.splitlines()[1], 'x,3,0.5,false')

    def test_read_errors_name_the_row(self):
        header = ','.join(THEORY_COLUMNS) + '\n'
        good = 'outer,case1,0.5,2,0.6,1000,10000,4,1,0.4\n'
        with self.assertRaises(CsvFormatError) as ctx:
            read_rows(io.StringIO(header + good + 'outer,case1,1.5,2,0.6,1000,10000,4,1,0.4\n'), THEORY_COLUMNS)
        self.assertEqual(ctx.exception.row, 2)
        with self.assertRaises(CsvFormatError) as ctx:
            read_rows(io.StringIO(header + good + good.strip() + ',extra\n'), THEORY_COLUMNS)
        self.assertIn('row 2', str(ctx.exception))
        with self.assertRaises(CsvFormatError):
            read_rows(io.StringIO('p,t\n0.1,1\n'), THEORY_COLUMNS)
        with self.assertRaises(CsvFormatError):
            read_rows(io.StringIO(header + good.replace('outer', 'lower')), THEORY_COLUMNS)

    def test_theory_round_trip(self):
        params = TheoryParams(gamma_r=0.6, m=1000, n=10000, K=4, C=2.0)
        curve = TradeoffCurve([CurvePoint(0.25, 0.5, 'case1', 'achievable'), CurvePoint(0.75, 1.0, 'case4', 'outer')])
        path = self.path('theory.csv')
        write_rows(path, THEORY_COLUMNS, curve_rows(curve, params))
        records = read_curve_records(path)
        self.assertEqual(records, [CurveRecord(0.6, 'achievable', 0.25, 0.25), CurveRecord(0.6, 'outer', 0.75, 0.5)])
        self.assertEqual(pick_source(records, ('simulated', 'outer')), 'outer')
        self.assertEqual(pick_source(records, ('simulated',)), 'achievable')
        self.assertIsNone(pick_source([], ('simulated',)))

    def test_unknown_layout(self):
        path = self.path('other.csv')
        with open(path, 'w') as handle:
            handle.write('a,b\n1,2\n')
        with self.assertRaises(CsvFormatError):
            read_curve_records(path)


class ManifestTestCase(BaseTestCase):
    def test_round_trip(self):
        started = datetime(2024, 5, 1, 12, 0, tzinfo=timezone.utc)
        manifest = RunManifest(command='theory', tool_version='0.1.0', config={'n': 100, 'g_c': [4]},
                               started_at=started, finished_at=started + timedelta(seconds=3), seed=None,
                               outputs=['a.csv'])
        schema = RunManifestSchema()
        self.assertEqual(schema.loads(schema.dumps(manifest)), manifest)

    def test_rejects_unknown_command(self):
        with self.assertRaises(ValidationError):
            RunManifestSchema().load({'command': 'plot', 'tool_version': '0.1.0', 'config': {},
                                      'started_at': '2024-05-01T12:00:00+00:00',
                                      'finished_at': '2024-05-01T12:00:01+00:00'})


class ComparisonTestCase(BaseTestCase):
    def test_interpolates_at_matched_outage(self):
        first = [CurveRecord(0.6, 'simulated', 0.5, 1.5), CurveRecord(0.6, 'simulated', 0.95, 1.0)]
        second = [CurveRecord(0.6, 'achievable', 0.2, 1.0), CurveRecord(0.6, 'achievable', 0.8, 2.2),
                  CurveRecord(0.6, 'outer', 0.5, 100.0)]
        rows = compare_records(first, second)
        self.assertEqual(len(rows), 1)
        self.assertAlmostEqual(rows[0].t_theory, 1.6)
        self.assertAlmostEqual(rows[0].rel_error, 0.1 / 1.6)

    def test_groups_by_exponent(self):
        first = [CurveRecord(0.4, 'simulated', 0.5, 1.0), CurveRecord(0.6, 'simulated', 0.5, 1.0)]
        second = [CurveRecord(0.6, 'achievable', 0.0, 2.0), CurveRecord(0.6, 'achievable', 1.0, 2.0)]
        rows = compare_records(first, second)
        self.assertEqual([(r.gamma_r, r.rel_error) for r in rows], [(0.6, 0.5)])

    def test_no_overlap(self):
        with self.assertRaises(ValueError):
            compare_records([CurveRecord(0.6, 'simulated', 0.5, 1.0)], [CurveRecord(0.5, 'achievable', 0.5, 1.0)])

    def test_plot_labels(self):
        records = [CurveRecord(0.6, 'achievable', 0.5, 1.0)]
        series = plot_series(records, records)
        self.assertEqual(list(series), ['achievable gamma_r=0.6', "achievable gamma_r=0.6'"])


class SvgTestCase(BaseTestCase):
    def test_one_polyline_per_series(self):
        svg = render_tradeoff_svg({'a': ([0.1, 0.5], [1e-3, 1e-2]), 'b & c': ([0.2], [0.0])}, title='t')
        self.assertTrue(svg.startswith('<svg'))
        self.assertEqual(svg.count('<polyline'), 1)
        self.assertNotIn('b & c', svg)

    def test_empty_plot(self):
        self.assertIn('</svg>', render_tradeoff_svg({}))

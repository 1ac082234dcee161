import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from ..corpus import mask_entities
from ..exceptions import OntologyError
from ..labels import UNCATEGORIZED, DrugCategory
from ..ontology_store import (
    dump_ontology,
    export_lexicon,
    find_drug_mentions,
    load_ontology,
    ontology_metrics,
    parse_ontology,
    resolve_term,
    super_category,
)
from ..text_utils import spans, term_key, tokenize
from .helpers import ONTOLOGY_PATH, fixture_ontology, make_post

CYCLIC = [
    'C\ta\tsubstance_class\tA\tb',
    'C\tb\tsubstance_class\tB\tc',
    'C\tc\tsubstance_class\tC\ta',
]


class OntologyLoadingTests(SimpleTestCase):
    def test_fixture_metrics_match_hand_counts(self):
        lines = [line.rstrip('\n').split('\t') for line in ONTOLOGY_PATH.read_text(encoding='utf-8').splitlines()]
        concepts = [parts for parts in lines if parts[0] == 'C']
        lexicon = [parts for parts in lines if parts[0] == 'L']
        relations = sum(len([p for p in parts[4].split(',') if p and p != '-']) for parts in concepts)

        metrics = ontology_metrics(fixture_ontology())

        self.assertEqual(metrics.concepts, len(concepts))
        self.assertEqual(metrics.lexicon_entries, len(lexicon))
        self.assertEqual(metrics.relations, relations)

    def test_cycle_is_named_with_line(self):
        with self.assertRaises(OntologyError) as cm:
            parse_ontology(CYCLIC)
        self.assertIn('cycle', str(cm.exception))
        self.assertIsNotNone(cm.exception.line)
        for cid in ('a', 'b', 'c'):
            self.assertIn(cid, cm.exception.offending.split(','))

    def test_dangling_parent_rejected(self):
        with self.assertRaises(OntologyError) as cm:
            parse_ontology(['C\theroin\tsubstance\tHeroin\topiate'])
        self.assertEqual(cm.exception.offending, 'opiate')
        self.assertEqual(cm.exception.line, 1)

    def test_duplicate_surface_form_rejected(self):
        lines = [
            'C\theroin\tsubstance\tHeroin\t-',
            'L\tsmack\theroin\tslang',
            'L\tSmack\theroin\tslang',
        ]
        with self.assertRaises(OntologyError) as cm:
            parse_ontology(lines)
        self.assertEqual(cm.exception.line, 3)

    def test_ambiguous_category_rejected(self):
        lines = [
            'C\tx\tsubstance_class\tX\t-',
            'C\ty\tsubstance_class\tY\t-',
            'C\tmix\tsubstance\tMix\tx,y',
            'R\tHeroin\tx',
            'R\tOpium\ty',
        ]
        with self.assertRaises(OntologyError) as cm:
            parse_ontology(lines)
        self.assertEqual(cm.exception.offending, 'mix')

    def test_dump_and_reload_preserve_structure(self):
        ontology = fixture_ontology()
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'dao.tsv'
            dump_ontology(ontology, path)
            again = load_ontology(path)
        self.assertEqual(dict(again.concepts), dict(ontology.concepts))
        self.assertEqual(dict(again.lexicon), dict(ontology.lexicon))
        self.assertEqual(dict(again.category_roots), dict(ontology.category_roots))


class TermResolutionTests(SimpleTestCase):
    def setUp(self):
        self.ontology = fixture_ontology()

    def test_slang_resolves_case_insensitively(self):
        self.assertEqual(resolve_term(self.ontology, 'SMACK').id, 'heroin')
        self.assertEqual(resolve_term(self.ontology, '  Black   Tar ').id, 'heroin')
        self.assertIsNone(resolve_term(self.ontology, 'lemonade'))

    def test_code_forms_share_a_key(self):
        self.assertEqual(term_key('U-47,700'), term_key('u47700'))
        self.assertEqual(resolve_term(self.ontology, 'U-47,700').id, 'u-47700')

    def test_words_split_at_commas_and_dots_but_codes_do_not(self):
        self.assertEqual([s.text for s in spans('got dope,then left')], ['got', 'dope', 'then', 'left'])
        self.assertEqual([s.text for s in spans("don't mix U-47,700 with 1.5 bars")],
                         ["don't", 'mix', 'U-47,700', 'with', '1.5', 'bars'])
        second = spans('heroin.Then')[1]
        self.assertEqual((second.text, second.start, second.end), ('Then', 7, 11))
        self.assertEqual([m.concept_id for m in find_drug_mentions(self.ontology, 'a u-47700. then')], ['u-47700'])

    def test_super_category(self):
        carfentanil = resolve_term(self.ontology, 'carfent')
        self.assertEqual(super_category(self.ontology, carfentanil), DrugCategory.NON_PHARMACEUTICAL_FENTANYL)
        codeine = self.ontology.concepts['codeine']
        self.assertEqual(super_category(self.ontology, codeine), UNCATEGORIZED)

    def test_export_lexicon(self):
        self.assertEqual(export_lexicon(self.ontology, [DrugCategory.KRATOM]), ['ketum', 'kratom', 'mitragynine'])
        self.assertEqual(export_lexicon(self.ontology, []), [])

    def test_longest_match_wins(self):
        matches = find_drug_mentions(self.ontology, 'bought some black tar heroin today')
        self.assertEqual([m.surface.lower() for m in matches], ['black tar', 'heroin'])
        self.assertEqual({m.concept_id for m in matches}, {'heroin'})

    def test_masking_replaces_mentions_with_category_tokens(self):
        post = make_post('m1', text='got some fent and percocet, no poppy tea')
        masked = mask_entities(post, self.ontology)
        self.assertEqual(masked, 'got some [DRUG_FENTANYL] and [DRUG_OXYCODONE], no [DRUG_OPIUM]')
        self.assertEqual(tokenize(masked)[2], '[DRUG_FENTANYL]')

import os

from django.conf import settings

from apps.classifiers.bow import TrainingSettings, accuracy, save_model, train_bow
from apps.commands import StabilityCommand
from apps.embeddings.bundled import build_embeddings
from apps.embeddings.store import save_embeddings
from apps.texts.corpora import CORPUS_SHAPES, build_corpus, write_corpus


class Command(StabilityCommand):
    help = 'Write the bundled corpora, embedding table and trained classifiers to STABILITY_DATA_DIR'

    def add_arguments(self, parser):
        parser.add_argument(
            '--clear',
            action='store_true',
            help='Remove previously generated files before seeding',
        )
        parser.add_argument(
            '--data-dir',
            help='Target directory (defaults to STABILITY_DATA_DIR)',
        )
        parser.add_argument(
            '--epochs',
            type=int,
            help='Training epochs for the bundled classifiers',
        )

    def run(self, *args, **options):
        data_dir = str(options['data_dir'] or settings.STABILITY_DATA_DIR)
        os.makedirs(data_dir, exist_ok=True)

        if options['clear']:
            self.stdout.write('🗑️  Clearing generated files...')
            removed = 0
            for name in self.generated_files():
                path = os.path.join(data_dir, name)
                if os.path.exists(path):
                    os.remove(path)
                    removed += 1
            self.stdout.write(f'  ✅ Removed {removed} files\n')

        self.stdout.write(f'🧪 Seeding explanation stability data into {data_dir}...\n')
        hyper = TrainingSettings.from_settings(epochs=options['epochs'])

        self.stdout.write('📂 Writing corpora and training classifiers...')
        for name in CORPUS_SHAPES:
            corpus = build_corpus(name)
            write_corpus(corpus, os.path.join(data_dir, f'{name}.csv'))
            model = train_bow(corpus, hyper)
            save_model(model, os.path.join(data_dir, f'{name}.model'))
            self.stdout.write(
                f'  ✅ {name}: {len(corpus)} documents, '
                f'{len(model.vocabulary)} words, training accuracy {accuracy(model, corpus):.3f}'
            )

        self.stdout.write('🔤 Writing embedding table...')
        store = build_embeddings()
        save_embeddings(store, os.path.join(data_dir, 'embeddings.txt'))
        self.stdout.write(f'  ✅ {len(store)} words, dimension {store.dimension}')

        self.stdout.write(
            self.style.SUCCESS('✅ Data seeding completed successfully!')
        )

    @staticmethod
    def generated_files():
        names = ['embeddings.txt']
        for name in CORPUS_SHAPES:
            names += [f'{name}.csv', f'{name}.model']
        return names

from apps.classifiers.bow import TrainingSettings, accuracy, save_model, train_bow
from apps.commands import StabilityCommand
from apps.texts.corpora import load_dataset


class Command(StabilityCommand):
    help = 'Train the bag-of-words classifier on a labelled corpus and save it'

    def add_arguments(self, parser):
        parser.add_argument('--corpus', required=True,
                            help='CSV file with a text,label header, or "short"/"medium"')
        parser.add_argument('--out', required=True, help='Model file to write')
        parser.add_argument('--epochs', type=int)
        parser.add_argument('--step-size', type=float)
        parser.add_argument('--l2', type=float)
        parser.add_argument('--seed', type=int)

    def run(self, *args, **options):
        hyper = TrainingSettings.from_settings(
            epochs=options['epochs'],
            step_size=options['step_size'],
            l2=options['l2'],
            seed=options['seed'],
        )
        corpus = load_dataset(options['corpus'])
        model = train_bow(corpus, hyper)
        save_model(model, options['out'])

        self.stdout.write(
            f'Trained on {len(corpus)} documents: {len(model.vocabulary)} words, '
            f'classes {", ".join(model.classes)}'
        )
        self.stdout.write(f'Final loss {model.loss_history[-1]:.4f}, '
                          f'training accuracy {accuracy(model, corpus):.3f}')
        self.stdout.write(self.style.SUCCESS(f'✅ Model written to {options["out"]}'))

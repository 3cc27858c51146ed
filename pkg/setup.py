from setuptools import setup, find_packages  # type: ignore
from selfdual.selfdual import __version__ as selfdual_version


def get_long_description():
    with open('README.md', 'r', encoding='utf8') as f:
        return f.read()


setup(
    name='selfdual',
    version=selfdual_version,
    description='Exact self-dual Ginzburg-Landau vortex lattices on a torus, their energies, '
                'and upper bounds on the lower critical field near the triple point.',
    long_description=get_long_description(),
    long_description_content_type='text/markdown',
    keywords='ginzburg-landau superconductivity vortex lattice abrikosov bogomolny self-dual '
             'kazdan-warner theta function critical field spectral newton',
    license='MIT',
    packages=find_packages(exclude=('examples', 'examples.*')),
    exclude_package_data={
        '': ['examples.py', 'test.py']
    },
    install_requires=[
        'numpy>=1.20',
        'scipy>=1.12',
    ],
    entry_points={
        'console_scripts': [
            'selfdual=selfdual.cli:main',
        ],
    },
    python_requires='>=3.8, <4',
    classifiers=[
        'Development Status :: 4 - Beta',
        'License :: OSI Approved :: MIT License',
        'Operating System :: OS Independent',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: 3.12',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Physics',
        'Topic :: Scientific/Engineering :: Mathematics',
    ]
)

from setuptools import setup, find_packages

setup(
    name='tsss',
    version='0.3.0',
    description='Multi-hop retrieval-augmented question answering with template reasoning, prefix-cache accounting and similarity-based termination',
    packages=find_packages(exclude=['tests']),
    package_data={'tsss': ['templates/*.txt']},
    python_requires='>=3.10',
	install_requires=['flask', 'numpy', 'psutil', 'requests', 'rich', 'tinydb' ],
    extras_require={'test': ['pytest']},
    entry_points={'console_scripts': ['tsss=tsss.__main__:main']},
)

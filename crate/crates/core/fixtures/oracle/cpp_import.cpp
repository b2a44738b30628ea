#include <iostream>
#include <tj_absent/bigint.hpp>
using namespace std;

int main() {
    long long a, b;
    cin >> a >> b;
    cout << a + b << endl;
    return 0;
}

#include <iostream>
#include <vector>
using namespace std;

int main() {
    long long a, b;
    cin >> a >> b;
    vector<long long> v = {a, b};
    cout << v.at(a + 100) << endl;
    return 0;
}
